"""Schéma des rapports de validation (format JSON versionné)."""

from enum import StrEnum
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict

from .document import FieldClass

SCHEMA_VERSION = 1


class Verdict(StrEnum):
    """Verdict de validité d'un document."""

    VALID = "Valid"
    INVALID = "Invalid"
    UNSUPPORTED = "Unsupported"


class EvidenceKind(StrEnum):
    TOKEN = "token"
    DETECTION = "detection"


class Evidence(BaseModel):
    """
    Meilleur élément de preuve d'un critère satisfait.

    Attributes:
        kind: Token OCR étiqueté ou détection
        text: Texte du token (None pour une détection)
        box: Boîte [x_min, y_min, x_max, y_max] en pixels
        score: Confiance du token ou score de la détection
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: EvidenceKind
    text: str | None = None
    box: tuple[float, float, float, float]
    score: float


class CriterionResult(BaseModel):
    """Statut d'un critère de validité."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    field_class: FieldClass
    satisfied: bool
    evidence: Evidence | None = None
    candidates: int = 0


class ValidationReport(BaseModel):
    """
    Rapport de validation d'un document.

    Attributes:
        schema_version: Version du schéma (1)
        document_id: Identifiant du document
        verdict: Valid, Invalid ou Unsupported
        criteria: Statut de chaque critère activé, dans un ordre stable
        criteria_snapshot: Critères utilisés pour la décision
        config_fingerprint: Empreinte de la configuration du pipeline
        postprocessing: Seuils de post-traitement des détections
        notes: Conventions propres à cet outil, rappelées dans chaque rapport
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    schema_version: Literal[1] = SCHEMA_VERSION
    document_id: str
    verdict: Verdict
    criteria: tuple[CriterionResult, ...] = ()
    criteria_snapshot: dict[str, Any]
    config_fingerprint: str = ""
    postprocessing: dict[str, float] = {}
    notes: tuple[str, ...] = ()

    @property
    def failed_criteria(self) -> list[CriterionResult]:
        return [c for c in self.criteria if not c.satisfied]

    def to_json(self) -> str:
        """Sérialisation JSON stable (indentée)."""
        return self.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, data: str | bytes) -> "ValidationReport":
        return cls.model_validate_json(data)
