"""Shared fixtures for all tests."""

from pathlib import Path

import numpy as np
import pytest

from src.config import OcrClientConfig, PipelineConfig
from src.models.bounding_box import BBox
from src.models.detection import Detection
from src.models.document import Annotation, DatasetManifest, DocumentImage, DocumentRecord, FieldClass, Split
from src.models.ocr import OcrToken

FIXTURES_DIR = Path(__file__).parent / "fixtures"


# ============================================================================
# BOUNDING BOX FIXTURES
# ============================================================================

@pytest.fixture
def valid_bbox():
    """Create a valid pixel bounding box."""
    return BBox(10, 20, 40, 30)


@pytest.fixture
def overlapping_bbox():
    """Create a box overlapping valid_bbox by half its width."""
    return BBox(25, 20, 55, 30)


@pytest.fixture
def disjoint_bbox():
    """Create a box far away from valid_bbox."""
    return BBox(100, 100, 120, 110)


# ============================================================================
# DOCUMENT FIXTURES
# ============================================================================

@pytest.fixture
def blank_image():
    """Create a white 200x100 document image."""
    return DocumentImage.blank(200, 100)


@pytest.fixture
def gradient_image():
    """Create a 64x48 image with distinct pixel values."""
    ys, xs = np.mgrid[0:48, 0:64]
    pixels = np.stack([xs * 3, ys * 5, (xs + ys) % 256], axis=-1).astype(np.uint8)
    return DocumentImage(pixels)


@pytest.fixture
def invoice_annotations():
    """Create annotations for every annotatable class."""
    return (
        Annotation(FieldClass.TITLE, BBox(10, 5, 90, 15), "INVOICE"),
        Annotation(FieldClass.CLIENT, BBox(10, 20, 60, 30), "Acme"),
        Annotation(FieldClass.DATE, BBox(110, 20, 170, 30), "01/02/2024"),
        Annotation(FieldClass.TOTAL, BBox(110, 40, 140, 50), "Total"),
        Annotation(FieldClass.TOTAL_VALUE, BBox(150, 40, 190, 50), "120.00"),
        Annotation(FieldClass.STAMP, BBox(120, 60, 180, 90)),
        Annotation(FieldClass.SIGNATURE, BBox(20, 60, 80, 90)),
    )


@pytest.fixture
def invoice_record(blank_image, invoice_annotations):
    """Create a typed invoice record with all fields annotated."""
    return DocumentRecord("inv-001", blank_image, invoice_annotations)


@pytest.fixture
def handwritten_record(blank_image):
    """Create a handwritten record."""
    return DocumentRecord("inv-hw", blank_image, (), handwritten=True)


@pytest.fixture
def small_manifest(invoice_record, handwritten_record):
    """Create a test manifest with one typed and one handwritten document."""
    return DatasetManifest(Split.TEST, (invoice_record, handwritten_record))


# ============================================================================
# OCR FIXTURES
# ============================================================================

@pytest.fixture
def invoice_tokens():
    """Create OCR tokens matching invoice_annotations plus background words."""
    return [
        OcrToken("INVOICE", BBox(12, 6, 88, 14), 0.98),
        OcrToken("Acme", BBox(12, 21, 58, 29), 0.95),
        OcrToken("01/02/2024", BBox(112, 21, 168, 29), 0.9),
        OcrToken("Total", BBox(111, 41, 139, 49), 0.97),
        OcrToken("120.00", BBox(151, 41, 189, 49), 0.93),
        OcrToken("Thanks", BBox(10, 92, 50, 99), 0.8),
    ]


@pytest.fixture
def tesseract_tsv():
    """Load the recorded local engine output."""
    return (FIXTURES_DIR / "tesseract_sample.tsv").read_text(encoding="utf-8")


@pytest.fixture
def azure_response():
    """Load the recorded remote engine response."""
    return (FIXTURES_DIR / "azure_read_sample.json").read_text(encoding="utf-8")


# ============================================================================
# DETECTION FIXTURES
# ============================================================================

@pytest.fixture
def stamp_detection():
    """Create a confident stamp detection."""
    return Detection(FieldClass.STAMP, BBox(120, 60, 180, 90), 0.9)


@pytest.fixture
def signature_detection():
    """Create a confident signature detection."""
    return Detection(FieldClass.SIGNATURE, BBox(20, 60, 80, 90), 0.85)


# ============================================================================
# CONFIGURATION FIXTURES
# ============================================================================

@pytest.fixture
def default_config():
    """Create the default PipelineConfig."""
    return PipelineConfig()


@pytest.fixture
def ocr_client_config():
    """Create a live OCR client config with fast retries."""
    return OcrClientConfig(
        endpoint="https://ocr.example.test",
        key="secret",
        timeout=5,
        max_retries=3,
        retry_delay=0.0,
        poll_interval=0.0,
        max_polls=3,
        max_in_flight=2,
    )
