"""Modèles de données pour l'application."""

from .bounding_box import BBox, bbox_iou
from .detection import Detection
from .document import (
    ANNOTATION_CLASSES,
    CLASS_ORDER,
    KEYWORD_CLASSES,
    NUM_CLASSES,
    OBJECT_CLASSES,
    Annotation,
    DatasetManifest,
    DocumentImage,
    DocumentRecord,
    FieldClass,
    Split,
)
from .evaluation import ClassScores, DetectionEvalReport, TokenEvalReport
from .ocr import LabeledToken, OcrToken, SequenceExample, TokenPrediction
from .report import CriterionResult, Evidence, EvidenceKind, ValidationReport, Verdict

__all__ = [
    "ANNOTATION_CLASSES",
    "Annotation",
    "BBox",
    "CLASS_ORDER",
    "ClassScores",
    "CriterionResult",
    "DatasetManifest",
    "Detection",
    "DetectionEvalReport",
    "DocumentImage",
    "DocumentRecord",
    "Evidence",
    "EvidenceKind",
    "FieldClass",
    "KEYWORD_CLASSES",
    "LabeledToken",
    "NUM_CLASSES",
    "OBJECT_CLASSES",
    "OcrToken",
    "SequenceExample",
    "Split",
    "TokenEvalReport",
    "TokenPrediction",
    "ValidationReport",
    "Verdict",
    "bbox_iou",
]
