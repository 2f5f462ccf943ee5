"""Modèles des rapports d'évaluation (tokens et détection)."""

from dataclasses import dataclass, field
from typing import Any

from .document import FieldClass


@dataclass(frozen=True)
class ClassScores:
    """
    Précision, rappel et F1 d'une classe (ou d'une moyenne).

    Attributes:
        precision: Précision dans [0, 1]
        recall: Rappel dans [0, 1]
        f1: Moyenne harmonique de precision et recall
        support: Nombre d'occurrences de vérité terrain
        true_positives: Vrais positifs
        false_positives: Faux positifs
        false_negatives: Faux négatifs
    """

    precision: float
    recall: float
    f1: float
    support: int = 0
    true_positives: int = 0
    false_positives: int = 0
    false_negatives: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
        }


@dataclass(frozen=True)
class TokenEvalReport:
    """
    Rapport d'évaluation de la classification de tokens.

    La moyenne micro (classe Other exclue) est la valeur de référence ;
    la moyenne macro est fournie à titre indicatif.
    """

    per_class: dict[FieldClass, ClassScores]
    micro: ClassScores
    macro: ClassScores
    averaging: str = "micro"
    excluded: tuple[str, ...] = ("O",)

    def to_dict(self) -> dict[str, Any]:
        return {
            "averaging": self.averaging,
            "excluded": list(self.excluded),
            "micro": self.micro.to_dict(),
            "macro": self.macro.to_dict(),
            "per_class": {c.value: s.to_dict() for c, s in self.per_class.items()},
        }


@dataclass(frozen=True)
class DetectionEvalReport:
    """
    Rapport d'évaluation de la détection (AP/mAP façon COCO, 101 points).

    Les valeurs sont stockées dans [0, 1] ; to_dict() les exprime ×100
    avec 2 décimales.

    Attributes:
        ap: AP par classe puis par seuil d'IoU
        map_50: mAP@0.50
        map_50_95: mAP@[.50:.95]
        thresholds: Seuils d'IoU évalués
        excluded_classes: Classes sans vérité terrain (exclues des moyennes)
    """

    ap: dict[FieldClass, dict[float, float]]
    map_50: float
    map_50_95: float
    thresholds: tuple[float, ...]
    excluded_classes: tuple[FieldClass, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict[str, Any]:
        return {
            "mAP@0.50": round(self.map_50 * 100, 2),
            "mAP@50:95": round(self.map_50_95 * 100, 2),
            "per_class": {
                c.value: {f"{t:.2f}": round(v * 100, 2) for t, v in per_t.items()}
                for c, per_t in self.ap.items()
            },
            "excluded_classes": [c.value for c in self.excluded_classes],
            "interpolation": "coco-101",
        }
