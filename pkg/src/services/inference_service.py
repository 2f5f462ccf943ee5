"""Classification des tokens et post-traitement des détections."""

import logging
from collections.abc import Sequence

import numpy as np
from scipy.special import softmax

from ..clients.backends import DetectorBackend, LayoutBackend, check_scores
from ..exceptions import BackendError, BackendFailureError
from ..models.detection import Detection
from ..models.document import DocumentImage, FieldClass
from ..models.ocr import SequenceExample, TokenPrediction

logger = logging.getLogger(__name__)

SIMPLEX_TOLERANCE = 1e-9


def to_simplex(scores: np.ndarray) -> np.ndarray:
    """
    Normalise des scores en distributions de probabilité, ligne par ligne.

    Une ligne déjà sur le simplexe (positive, de somme 1) est conservée ;
    les autres sont vues comme des logits et passées au softmax.
    """
    scores = np.asarray(scores, dtype=np.float64)
    on_simplex = np.all(scores >= 0, axis=1) & (
        np.abs(scores.sum(axis=1) - 1.0) <= SIMPLEX_TOLERANCE
    )
    return np.where(on_simplex[:, None], scores, softmax(scores, axis=1))


def classify_tokens(
    backend: LayoutBackend, example: SequenceExample, image: DocumentImage
) -> list[tuple[FieldClass, float]]:
    """
    Classe chaque token d'une fenêtre.

    Les scores sont ramenés sur le simplexe (voir to_simplex) ; le label
    est l'argmax (égalités vers l'indice de classe le plus faible) et la
    confiance sa probabilité.

    Args:
        backend: Modèle de mise en page
        example: Fenêtre encodée
        image: Image du document

    Returns:
        (label, confiance) par token

    Raises:
        BackendFailureError: Échec ou sortie invalide du backend
    """
    if len(example) == 0:
        return []
    try:
        raw = backend.predict(example, image)
    except BackendError:
        raise
    except Exception as e:
        raise BackendFailureError(
            f"Échec du backend sur {example.document_id} (fenêtre {example.window_index}): {e}"
        ) from e

    scores = check_scores(raw, len(example))
    probabilities = to_simplex(scores)
    labels = np.argmax(probabilities, axis=1)
    return [
        (FieldClass.from_index(int(k)), float(probabilities[row, k]))
        for row, k in enumerate(labels)
    ]


def predict_tokens(
    backend: LayoutBackend, examples: Sequence[SequenceExample], image: DocumentImage
) -> list[TokenPrediction]:
    """
    Classe toutes les fenêtres d'un document.

    Un token présent dans plusieurs fenêtres garde la prédiction de la
    première fenêtre qui le contient.
    """
    predictions: list[TokenPrediction] = []
    for example in sorted(examples, key=lambda e: e.offset):
        skip = max(len(predictions) - example.offset, 0)
        results = classify_tokens(backend, example, image)
        for token, (label, confidence) in list(zip(example.tokens, results))[skip:]:
            predictions.append(TokenPrediction(token, label, confidence))
    return predictions


def filter_detections(detections: Sequence[Detection], score_threshold: float) -> list[Detection]:
    """
    Conserve les détections de score ≥ seuil, dans l'ordre d'entrée.

    Args:
        detections: Détections brutes
        score_threshold: Seuil dans [0, 1]

    Returns:
        Sous-ensemble filtré
    """
    if not 0.0 <= score_threshold <= 1.0:
        raise ValueError(f"Seuil hors de [0, 1]: {score_threshold}")
    return [d for d in detections if d.score >= score_threshold]


def nms(detections: Sequence[Detection], iou_threshold: float = 0.5) -> list[Detection]:
    """
    Suppression des non-maxima, classe par classe.

    Les détections sont triées par score décroissant (égalités : boîte dans
    l'ordre lexicographique) ; une détection est gardée si son IoU avec
    chaque détection déjà gardée de même classe est < iou_threshold.

    Args:
        detections: Détections d'une image
        iou_threshold: Seuil d'IoU

    Returns:
        Détections gardées, dans l'ordre de tri global
    """
    ordered = sorted(detections, key=Detection.sort_key)
    if not ordered:
        return []

    boxes = np.array([d.box.as_tuple() for d in ordered], dtype=np.float64)
    x1, y1, x2, y2 = boxes.T
    areas = (x2 - x1) * (y2 - y1)
    classes = np.array([d.field_class.index for d in ordered])

    keep = np.ones(len(ordered), dtype=bool)
    for i in range(len(ordered)):
        if not keep[i]:
            continue
        rest = np.arange(i + 1, len(ordered))
        rest = rest[keep[rest] & (classes[rest] == classes[i])]
        if rest.size == 0:
            continue
        xx1 = np.maximum(x1[i], x1[rest])
        yy1 = np.maximum(y1[i], y1[rest])
        xx2 = np.minimum(x2[i], x2[rest])
        yy2 = np.minimum(y2[i], y2[rest])
        inter = np.maximum(0.0, xx2 - xx1) * np.maximum(0.0, yy2 - yy1)
        iou = inter / (areas[i] + areas[rest] - inter)
        keep[rest[iou >= iou_threshold]] = False

    return [d for d, kept in zip(ordered, keep) if kept]


def detect(
    backend: DetectorBackend,
    image: DocumentImage,
    document_id: str | None = None,
    score_threshold: float = 0.5,
    iou_threshold: float = 0.5,
) -> list[Detection]:
    """Détection complète : backend → filtrage par score → NMS."""
    try:
        raw = backend.predict(image, document_id)
    except BackendError:
        raise
    except Exception as e:
        raise BackendFailureError(f"Échec du détecteur sur {document_id}: {e}") from e
    kept = nms(filter_detections(raw, score_threshold), iou_threshold)
    logger.debug("%s: %d détection(s) brute(s), %d gardée(s)", document_id, len(raw), len(kept))
    return kept
