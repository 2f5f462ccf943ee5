"""
Service d'étiquetage des tokens OCR et d'encodage des séquences.
"""

import logging
import math
from collections import Counter
from collections.abc import Iterable, Sequence
from pathlib import Path

from ..exceptions import EmptyDocumentError, InvoiceValidationError
from ..models.bounding_box import BBox
from ..models.document import CLASS_ORDER, KEYWORD_CLASSES, Annotation, FieldClass
from ..models.ocr import LabeledToken, OcrToken, SequenceExample

logger = logging.getLogger(__name__)

GRID = 1000


def assign_labels(
    tokens: Sequence[OcrToken],
    annotations: Sequence[Annotation],
    overlap_threshold: float = 0.5,
    label_classes: Iterable[FieldClass] = KEYWORD_CLASSES,
) -> list[LabeledToken]:
    """
    Attribue à chaque token la classe de l'annotation qui le recouvre le plus.

    Le recouvrement est mesuré relativement à l'aire du token :
    area(token ∩ annotation) / area(token). Un token reçoit la classe de
    l'annotation de plus fort ratio si ce ratio atteint le seuil, sinon
    Other. Égalités : ratio le plus fort, puis plus petite annotation, puis
    indice d'annotation le plus faible.

    Args:
        tokens: Tokens OCR de l'image
        annotations: Annotations de la même image
        overlap_threshold: Ratio minimal dans [0, 1]
        label_classes: Classes d'annotation prises en compte (champs textuels par défaut)

    Returns:
        Un token étiqueté par token, dans le même ordre
    """
    allowed = set(label_classes)
    candidates = [(i, a) for i, a in enumerate(annotations) if a.field_class in allowed]

    labeled: list[LabeledToken] = []
    for token in tokens:
        best: tuple[float, float, int] | None = None
        for index, annotation in candidates:
            ratio = token.box.intersection_area(annotation.box) / token.box.area
            if ratio <= 0 or ratio < overlap_threshold:
                continue
            key = (-ratio, annotation.box.area, index)
            if best is None or key < best:
                best = key
        if best is None:
            labeled.append(LabeledToken(token, FieldClass.OTHER))
        else:
            index = best[2]
            labeled.append(LabeledToken(token, annotations[index].field_class, index))
    return labeled


def count_label_instances(
    documents: Iterable[Sequence[LabeledToken]],
) -> dict[FieldClass, int]:
    """
    Compte les tokens étiquetés par classe, Other compris.

    Args:
        documents: Tokens étiquetés, document par document

    Returns:
        Effectif de chaque classe (toutes les classes présentes, zéros compris)
    """
    counts = Counter(t.label for doc in documents for t in doc)
    return {c: counts.get(c, 0) for c in CLASS_ORDER}


def normalize_box(box: BBox, width: int, height: int) -> tuple[int, int, int, int]:
    """Projette une boîte pixel sur la grille entière 0-1000 (troncature)."""
    if width <= 0 or height <= 0:
        raise InvoiceValidationError(f"Dimensions d'image invalides: {width}x{height}")

    def scale(value: float, dim: int) -> int:
        return min(max(math.floor(value * GRID / dim), 0), GRID)

    return (
        scale(box.x_min, width),
        scale(box.y_min, height),
        scale(box.x_max, width),
        scale(box.y_max, height),
    )


def build_sequence_examples(
    tokens: Sequence[LabeledToken] | Sequence[OcrToken],
    width: int,
    height: int,
    max_sequence_length: int = 512,
    stride: int = 0,
    document_id: str = "",
) -> list[SequenceExample]:
    """
    Découpe une séquence de tokens en fenêtres encodées.

    Les fenêtres commencent tous les max_sequence_length - stride tokens
    (stride = chevauchement entre fenêtres consécutives).

    Args:
        tokens: Tokens dans l'ordre de lecture (étiquetés ou non)
        width: Largeur de l'image
        height: Hauteur de l'image
        max_sequence_length: Taille maximale d'une fenêtre
        stride: Chevauchement, dans [0, max_sequence_length)
        document_id: Identifiant du document

    Returns:
        Fenêtres dans l'ordre

    Raises:
        EmptyDocumentError: Si aucun token n'est fourni
    """
    if not tokens:
        raise EmptyDocumentError(f"Aucun token pour le document {document_id!r}")
    if max_sequence_length < 1 or not 0 <= stride < max_sequence_length:
        raise InvoiceValidationError(
            f"Fenêtrage invalide: longueur {max_sequence_length}, chevauchement {stride}"
        )

    labeled = isinstance(tokens[0], LabeledToken)
    plain = [t.token if isinstance(t, LabeledToken) else t for t in tokens]
    labels = [t.label for t in tokens] if labeled else None
    boxes = [normalize_box(t.box, width, height) for t in plain]

    step = max_sequence_length - stride
    examples = []
    start = 0
    while True:
        end = min(start + max_sequence_length, len(plain))
        examples.append(
            SequenceExample(
                document_id=document_id,
                window_index=len(examples),
                offset=start,
                tokens=tuple(plain[start:end]),
                boxes=tuple(boxes[start:end]),
                labels=tuple(labels[start:end]) if labels is not None else None,
            )
        )
        if end >= len(plain):
            break
        start += step
    return examples


def merge_windows(examples: Sequence[SequenceExample]) -> list[OcrToken]:
    """
    Reconstitue la séquence complète à partir des fenêtres (chevauchements retirés).

    Args:
        examples: Fenêtres d'un même document

    Returns:
        Tokens dans l'ordre d'origine
    """
    merged: list[OcrToken] = []
    for example in sorted(examples, key=lambda e: e.offset):
        skip = len(merged) - example.offset
        merged.extend(example.tokens[max(skip, 0):])
    return merged


def write_json_lines(examples: Iterable[SequenceExample], path: str | Path) -> int:
    """Écrit une fenêtre par ligne ; renvoie le nombre de lignes."""
    count = 0
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for example in examples:
            f.write(example.to_json_line() + "\n")
            count += 1
    return count


def read_json_lines(path: str | Path) -> list[SequenceExample]:
    with open(path, encoding="utf-8") as f:
        return [SequenceExample.from_json_line(line) for line in f if line.strip()]
