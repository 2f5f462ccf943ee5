"""Services métier de l'application."""

from .augmentation_service import AugmentationService
from .ocr_service import OcrService
from .pipeline_service import PipelineService, run_pipeline

__all__ = ["AugmentationService", "OcrService", "PipelineService", "run_pipeline"]
