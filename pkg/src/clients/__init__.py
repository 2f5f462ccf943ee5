"""Clients des moteurs externes : OCR et modèles."""

from .azure_read_client import AzureReadClient
from .backends import (
    DetectorBackend,
    LayoutBackend,
    MockDetectorBackend,
    MockLayoutBackend,
    OnnxDetectorBackend,
    OnnxLayoutBackend,
    resolve_backend,
)
from .ocr_engines import OcrEngine, RecordedOcrEngine, TesseractEngine
from .ocr_parsers import format_local_engine_output, parse_cloud_read_response, parse_local_engine_output

__all__ = [
    "AzureReadClient",
    "DetectorBackend",
    "LayoutBackend",
    "MockDetectorBackend",
    "MockLayoutBackend",
    "OcrEngine",
    "OnnxDetectorBackend",
    "OnnxLayoutBackend",
    "RecordedOcrEngine",
    "TesseractEngine",
    "format_local_engine_output",
    "parse_cloud_read_response",
    "parse_local_engine_output",
    "resolve_backend",
]
