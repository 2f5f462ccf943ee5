"""Modèle pour les détections de tampons et de signatures."""

import math
from dataclasses import dataclass
from typing import Any

from ..exceptions import InvoiceValidationError
from .bounding_box import BBox
from .document import OBJECT_CLASSES, FieldClass


@dataclass(frozen=True)
class Detection:
    """
    Boîte de tampon ou de signature produite par un détecteur.

    Attributes:
        field_class: Stamp ou Signature
        box: Boîte en pixels
        score: Score de confiance dans [0, 1]
    """

    field_class: FieldClass
    box: BBox
    score: float

    def __post_init__(self) -> None:
        if self.field_class not in OBJECT_CLASSES:
            raise InvoiceValidationError(
                f"Classe de détection invalide: {self.field_class}"
            )
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise InvoiceValidationError(f"Score hors de [0, 1]: {self.score}")

    def sort_key(self) -> tuple[float, tuple[float, float, float, float]]:
        """Clé de tri : score décroissant puis ordre lexicographique de la boîte."""
        return (-self.score, self.box.as_tuple())

    def to_dict(self) -> dict[str, Any]:
        return {
            "class": self.field_class.value,
            "box": self.box.to_list(),
            "score": self.score,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Detection":
        return cls(
            field_class=FieldClass(data["class"]),
            box=BBox.from_list(data["box"]),
            score=float(data["score"]),
        )
