"""Modèles pour les tokens OCR, leur étiquetage et leur encodage."""

import json
import math
from dataclasses import dataclass
from typing import Any

from ..exceptions import InvoiceValidationError
from .bounding_box import BBox
from .document import FieldClass


@dataclass(frozen=True)
class OcrToken:
    """
    Mot reconnu par un moteur OCR.

    Attributes:
        text: Texte du mot (non vide après suppression des espaces)
        box: Boîte en pixels
        confidence: Confiance du moteur dans [0, 1]
    """

    text: str
    box: BBox
    confidence: float = 1.0

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise InvoiceValidationError("Token OCR vide")
        if not (math.isfinite(self.confidence) and 0.0 <= self.confidence <= 1.0):
            raise InvoiceValidationError(f"Confiance hors de [0, 1]: {self.confidence}")

    def to_dict(self) -> dict[str, Any]:
        return {"text": self.text, "box": self.box.to_list(), "confidence": self.confidence}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "OcrToken":
        return cls(
            text=data["text"],
            box=BBox.from_list(data["box"]),
            confidence=float(data.get("confidence", 1.0)),
        )


@dataclass(frozen=True)
class LabeledToken:
    """
    Token OCR aligné sur une annotation de vérité terrain.

    Attributes:
        token: Token OCR
        label: Classe attribuée (Other autorisé)
        source_annotation: Indice de l'annotation d'origine (None si Other)
    """

    token: OcrToken
    label: FieldClass
    source_annotation: int | None = None

    def __post_init__(self) -> None:
        if (self.label is FieldClass.OTHER) != (self.source_annotation is None):
            raise InvoiceValidationError(
                "label = Other si et seulement si aucune annotation source"
            )


@dataclass(frozen=True)
class TokenPrediction:
    """
    Classe prédite pour un token par un backend de mise en page.

    Attributes:
        token: Token OCR
        label: Classe prédite
        confidence: Probabilité de la classe prédite
    """

    token: OcrToken
    label: FieldClass
    confidence: float

    @classmethod
    def from_labeled(cls, labeled: LabeledToken) -> "TokenPrediction":
        """Prédiction certaine issue d'un alignement de vérité terrain."""
        return cls(labeled.token, labeled.label, 1.0)


@dataclass(frozen=True)
class SequenceExample:
    """
    Fenêtre de tokens encodée pour un modèle de mise en page.

    Attributes:
        document_id: Identifiant du document
        window_index: Rang de la fenêtre dans le document
        offset: Position du premier token dans la séquence complète
        tokens: Tokens dans l'ordre de lecture
        boxes: Boîtes normalisées sur la grille entière 0-1000
        labels: Étiquettes par token (None à l'inférence)
    """

    document_id: str
    window_index: int
    offset: int
    tokens: tuple[OcrToken, ...]
    boxes: tuple[tuple[int, int, int, int], ...]
    labels: tuple[FieldClass, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.boxes) != len(self.tokens):
            raise InvoiceValidationError("Une boîte normalisée par token attendue")
        if self.labels is not None and len(self.labels) != len(self.tokens):
            raise InvoiceValidationError("Une étiquette par token attendue")
        for box in self.boxes:
            if not all(0 <= c <= 1000 for c in box):
                raise InvoiceValidationError(f"Coordonnées normalisées hors de [0, 1000]: {box}")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def words(self) -> list[str]:
        return [t.text for t in self.tokens]

    def to_json_line(self) -> str:
        """Sérialise la fenêtre en une ligne JSON."""
        payload = {
            "id": self.document_id,
            "window": self.window_index,
            "offset": self.offset,
            "words": self.words,
            "boxes": [list(b) for b in self.boxes],
            "pixel_boxes": [t.box.to_list() for t in self.tokens],
            "confidences": [t.confidence for t in self.tokens],
            "labels": [l.value for l in self.labels] if self.labels is not None else None,
        }
        return json.dumps(payload, ensure_ascii=False)

    @classmethod
    def from_json_line(cls, line: str) -> "SequenceExample":
        """Relit une fenêtre sérialisée par to_json_line."""
        data = json.loads(line)
        tokens = tuple(
            OcrToken(word, BBox.from_list(box), conf)
            for word, box, conf in zip(data["words"], data["pixel_boxes"], data["confidences"])
        )
        labels = data.get("labels")
        return cls(
            document_id=data["id"],
            window_index=int(data["window"]),
            offset=int(data["offset"]),
            tokens=tokens,
            boxes=tuple(tuple(int(c) for c in b) for b in data["boxes"]),
            labels=tuple(FieldClass(l) for l in labels) if labels is not None else None,
        )
