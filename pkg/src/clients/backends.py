"""
Backends d'inférence : modèle de mise en page et détecteur d'objets.

Deux implémentations par interface :
- "mock" : déterministe, lit la vérité terrain des documents ;
- "onnx:<chemin>" : modèle exporté au format ONNX (extra 'onnx').

Tenseurs ONNX attendus :
- mise en page : entrées input_ids (1, n), bbox (1, n, 4), pixel_values
  (1, 3, 224, 224) ; sortie logits (1, n, 8) ;
- détecteur : entrée image (1, 3, H, W) dans [0, 1] ; sorties boxes (N, 4),
  scores (N,), classes (N,) avec 0 = Stamp et 1 = Signature.
"""

import logging
import threading
from abc import ABC, abstractmethod
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Literal

import cv2
import numpy as np

from ..exceptions import BackendConfigError, BackendFailureError
from ..models.bounding_box import BBox
from ..models.detection import Detection
from ..models.document import (
    CLASS_ORDER,
    KEYWORD_CLASSES,
    NUM_CLASSES,
    OBJECT_CLASSES,
    Annotation,
    DocumentImage,
)
from ..models.ocr import SequenceExample

logger = logging.getLogger(__name__)

GroundTruth = Mapping[str, Sequence[Annotation]]

MOCK_SCORE = 0.95
MOCK_DUPLICATE_SCORE = 0.6
PATCH_SIZE = 224


class LayoutBackend(ABC):
    """
    Interface d'un modèle de mise en page.

    Attributes:
        exclusive: True si predict ne supporte pas les appels concurrents
    """

    exclusive: bool = False

    @abstractmethod
    def predict(self, example: SequenceExample, image: DocumentImage) -> np.ndarray:
        """
        Scores par token.

        Returns:
            Tableau (n_tokens, 8) de scores finis, colonnes dans l'ordre de FieldClass
        """


class DetectorBackend(ABC):
    """Interface d'un détecteur de tampons et de signatures."""

    exclusive: bool = False

    @abstractmethod
    def predict(self, image: DocumentImage, document_id: str | None = None) -> list[Detection]:
        """
        Détections brutes (avant filtrage et NMS).

        Returns:
            Détections aux boîtes restreintes à l'image
        """


# ==================== MOCKS ====================


class MockLayoutBackend(LayoutBackend):
    """
    Backend de mise en page déterministe.

    Renvoie un vecteur one-hot par token, obtenu en alignant les tokens sur
    les annotations de vérité terrain du document.

    Attributes:
        ground_truth: Annotations par identifiant de document
        overlap_threshold: Seuil d'alignement token / annotation
    """

    def __init__(self, ground_truth: GroundTruth | None = None, overlap_threshold: float = 0.5):
        self.ground_truth = dict(ground_truth or {})
        self.overlap_threshold = overlap_threshold

    def predict(self, example: SequenceExample, image: DocumentImage) -> np.ndarray:
        from ..services.labeling_service import assign_labels

        annotations = self.ground_truth.get(example.document_id, ())
        labeled = assign_labels(
            example.tokens, annotations, self.overlap_threshold, KEYWORD_CLASSES
        )
        scores = np.zeros((len(labeled), NUM_CLASSES), dtype=np.float64)
        for row, token in enumerate(labeled):
            scores[row, token.label.index] = 1.0
        return scores


class MockDetectorBackend(DetectorBackend):
    """
    Détecteur déterministe.

    Chaque tampon ou signature annoté produit une détection de score 0.95
    et un doublon décalé d'un pixel de score 0.6 (supprimé par la NMS).
    """

    def __init__(self, ground_truth: GroundTruth | None = None, duplicates: bool = True):
        self.ground_truth = dict(ground_truth or {})
        self.duplicates = duplicates

    def predict(self, image: DocumentImage, document_id: str | None = None) -> list[Detection]:
        detections: list[Detection] = []
        for annotation in self.ground_truth.get(document_id or "", ()):
            if annotation.field_class not in OBJECT_CLASSES:
                continue
            box = annotation.box.clip(image.width, image.height)
            if box is None:
                continue
            detections.append(Detection(annotation.field_class, box, MOCK_SCORE))
            if self.duplicates:
                shifted = box.translate(1.0, 1.0).clip(image.width, image.height)
                if shifted is not None:
                    detections.append(
                        Detection(annotation.field_class, shifted, MOCK_DUPLICATE_SCORE)
                    )
        return detections


# ==================== ONNX ====================


def _load_session(path: str):
    try:
        import onnxruntime as ort
    except ImportError as e:
        raise BackendConfigError("onnxruntime non installé (extra 'onnx')") from e
    if not Path(path).is_file():
        raise BackendConfigError(f"Modèle ONNX introuvable: {path}")
    return ort.InferenceSession(path, providers=["CPUExecutionProvider"])


def _image_tensor(image: DocumentImage, size: tuple[int, int] | None = None) -> np.ndarray:
    pixels = np.asarray(image.pixels)
    if size is not None:
        pixels = cv2.resize(pixels, size, interpolation=cv2.INTER_LINEAR)
    return (pixels.astype(np.float32) / 255.0).transpose(2, 0, 1)[None]


class OnnxLayoutBackend(LayoutBackend):
    """
    Modèle de mise en page exporté en ONNX.

    Les mots sont découpés par un tokenizer transformers (extra 'layout') ;
    le score d'un mot est celui de son premier sous-token.
    """

    exclusive = True

    def __init__(self, model_path: str, tokenizer: str | None = None):
        if tokenizer is None:
            raise BackendConfigError("backends.tokenizer est requis pour un modèle de mise en page ONNX")
        self._session = _load_session(model_path)
        try:
            from transformers import AutoTokenizer
        except ImportError as e:
            raise BackendConfigError("transformers non installé (extra 'layout')") from e
        self._tokenizer = AutoTokenizer.from_pretrained(tokenizer)

    def predict(self, example: SequenceExample, image: DocumentImage) -> np.ndarray:
        encoding = self._tokenizer(
            example.words,
            boxes=[list(b) for b in example.boxes],
            is_split_into_words=True,
            truncation=True,
            return_tensors="np",
        )
        pixel_values = (_image_tensor(image, (PATCH_SIZE, PATCH_SIZE)) - 0.5) / 0.5
        (logits,) = self._session.run(
            ["logits"],
            {
                "input_ids": encoding["input_ids"].astype(np.int64),
                "bbox": encoding["bbox"].astype(np.int64),
                "pixel_values": pixel_values.astype(np.float32),
            },
        )
        word_ids = encoding.word_ids(0)
        scores = np.zeros((len(example), NUM_CLASSES), dtype=np.float64)
        seen: set[int] = set()
        for position, word in enumerate(word_ids):
            if word is None or word in seen:
                continue
            seen.add(word)
            scores[word] = logits[0, position, :NUM_CLASSES]
        return scores


class OnnxDetectorBackend(DetectorBackend):
    """Détecteur exporté en ONNX (post-traitement interne au modèle non requis)."""

    exclusive = True

    def __init__(self, model_path: str):
        self._session = _load_session(model_path)

    def predict(self, image: DocumentImage, document_id: str | None = None) -> list[Detection]:
        boxes, scores, classes = self._session.run(
            ["boxes", "scores", "classes"], {"image": _image_tensor(image)}
        )
        detections = []
        for raw, score, cls in zip(boxes, scores, classes):
            if not 0 <= int(cls) < len(OBJECT_CLASSES):
                continue
            x_min, y_min, x_max, y_max = (max(float(c), 0.0) for c in raw)
            if x_min >= x_max or y_min >= y_max:
                continue
            box = BBox(x_min, y_min, x_max, y_max).clip(image.width, image.height)
            if box is None:
                continue
            detections.append(
                Detection(OBJECT_CLASSES[int(cls)], box, float(np.clip(score, 0.0, 1.0)))
            )
        return detections


# ==================== SÉRIALISATION ====================


class SerializedLayoutBackend(LayoutBackend):
    """Enveloppe un backend exclusif : un seul appel à predict à la fois."""

    def __init__(self, inner: LayoutBackend):
        self.inner = inner
        self._lock = threading.Lock()

    def predict(self, example: SequenceExample, image: DocumentImage) -> np.ndarray:
        with self._lock:
            return self.inner.predict(example, image)


class SerializedDetectorBackend(DetectorBackend):
    """Enveloppe un détecteur exclusif : un seul appel à predict à la fois."""

    def __init__(self, inner: DetectorBackend):
        self.inner = inner
        self._lock = threading.Lock()

    def predict(self, image: DocumentImage, document_id: str | None = None) -> list[Detection]:
        with self._lock:
            return self.inner.predict(image, document_id)


def resolve_backend(
    descriptor: str,
    kind: Literal["layout", "detector"],
    ground_truth: GroundTruth | None = None,
    tokenizer: str | None = None,
) -> LayoutBackend | DetectorBackend:
    """
    Construit un backend à partir de son descripteur.

    Les backends exclusifs sont enveloppés dans un verrou.

    Args:
        descriptor: "mock" ou "onnx:<chemin>"
        kind: "layout" ou "detector"
        ground_truth: Annotations par document (backends mock)
        tokenizer: Nom du tokenizer (modèle de mise en page ONNX)

    Returns:
        Le backend prêt à l'emploi

    Raises:
        BackendConfigError: Descripteur inconnu ou modèle introuvable
    """
    if kind not in ("layout", "detector"):
        raise BackendConfigError(f"Type de backend inconnu: {kind}")

    if descriptor == "mock":
        if kind == "layout":
            return MockLayoutBackend(ground_truth)
        return MockDetectorBackend(ground_truth)

    if descriptor.startswith("onnx:") and len(descriptor) > len("onnx:"):
        path = descriptor[len("onnx:"):]
        backend = OnnxLayoutBackend(path, tokenizer) if kind == "layout" else OnnxDetectorBackend(path)
        logger.info("Backend %s chargé depuis %s", kind, path)
        if backend.exclusive:
            if kind == "layout":
                return SerializedLayoutBackend(backend)
            return SerializedDetectorBackend(backend)
        return backend

    raise BackendConfigError(f"Descripteur de backend inconnu: {descriptor!r}")


def check_scores(scores: np.ndarray, n_tokens: int) -> np.ndarray:
    """
    Vérifie la forme et la finitude des scores d'un backend de mise en page.

    Raises:
        BackendFailureError: Forme inattendue ou valeurs non finies
    """
    array = np.asarray(scores, dtype=np.float64)
    if array.shape != (n_tokens, len(CLASS_ORDER)):
        raise BackendFailureError(
            f"Scores de forme {array.shape}, attendu ({n_tokens}, {len(CLASS_ORDER)})"
        )
    if not np.all(np.isfinite(array)):
        raise BackendFailureError("Scores non finis")
    return array
