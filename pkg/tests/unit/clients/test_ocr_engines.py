"""Tests for OCR engines."""

import shutil
from unittest.mock import Mock, patch

import pytest

from tests.conftest import FIXTURES_DIR
from src.clients.ocr_engines import Capability, RecordedOcrEngine, TesseractEngine
from src.exceptions import OcrError
from src.models.document import DocumentImage


@pytest.fixture
def page_image():
    """Create a page-sized blank image."""
    return DocumentImage.blank(600, 800)


@pytest.fixture
def recorded_dir(tmp_path):
    """Create a directory of recorded dumps for document 'doc-0000'."""
    shutil.copy(FIXTURES_DIR / "tesseract_sample.tsv", tmp_path / "doc-0000.tsv")
    shutil.copy(FIXTURES_DIR / "azure_read_sample.json", tmp_path / "doc-0000.json")
    return tmp_path


class TestRecordedOcrEngine:
    """Test RecordedOcrEngine replay."""

    def test_replay_tesseract(self, recorded_dir, page_image):
        """Test a TSV dump is replayed."""
        engine = RecordedOcrEngine(recorded_dir, "tesseract")
        tokens = engine.analyze(page_image, "doc-0000")
        assert [t.text for t in tokens] == ["INVOICE", "Client:", "Acme", "Total", "120.00"]

    def test_replay_azure(self, recorded_dir, page_image):
        """Test a Read JSON dump is replayed."""
        engine = RecordedOcrEngine(recorded_dir, "azure")
        assert len(engine.analyze(page_image, "doc-0000")) == 4

    def test_replay_is_deterministic(self, recorded_dir, page_image):
        """Test two replays give identical tokens."""
        engine = RecordedOcrEngine(recorded_dir)
        assert engine.analyze(page_image, "doc-0000") == engine.analyze(page_image, "doc-0000")

    def test_capability(self, recorded_dir):
        """Test the replayed format sets the capability."""
        assert RecordedOcrEngine(recorded_dir, "tesseract").capability is Capability.LOCAL
        assert RecordedOcrEngine(recorded_dir, "azure").capability is Capability.REMOTE

    def test_path_for(self, recorded_dir):
        """Test dump file naming."""
        assert RecordedOcrEngine(recorded_dir, "azure").path_for("x").name == "x.json"

    def test_missing_dump(self, recorded_dir, page_image):
        """Test a missing dump is an OCR error."""
        with pytest.raises(OcrError):
            RecordedOcrEngine(recorded_dir).analyze(page_image, "doc-9999")

    def test_document_id_required(self, recorded_dir, page_image):
        """Test replay needs a document id."""
        with pytest.raises(OcrError):
            RecordedOcrEngine(recorded_dir).analyze(page_image)

    def test_tokens_clipped_to_small_image(self, recorded_dir):
        """Test replayed tokens are clipped to the image."""
        tokens = RecordedOcrEngine(recorded_dir).analyze(DocumentImage.blank(150, 100), "doc-0000")
        assert [t.text for t in tokens] == ["INVOICE"]
        assert tokens[0].box.x_max == 150


class TestTesseractEngine:
    """Test TesseractEngine with a mocked pytesseract."""

    def test_analyze_parses_image_to_data(self, page_image):
        """Test the TSV returned by pytesseract is parsed."""
        fake = Mock()
        fake.image_to_data.return_value = (FIXTURES_DIR / "tesseract_sample.tsv").read_text()
        with patch.dict("sys.modules", {"pytesseract": fake}):
            engine = TesseractEngine(lang="fra")
            tokens = engine.analyze(page_image, "doc")
        assert len(tokens) == 5
        assert fake.image_to_data.call_args.kwargs["lang"] == "fra"

    def test_missing_dependency(self):
        """Test a missing pytesseract is reported as an OCR error."""
        with patch.dict("sys.modules", {"pytesseract": None}):
            with pytest.raises(OcrError):
                TesseractEngine()
