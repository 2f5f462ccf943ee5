"""
Décision de validité multi-critères d'une facture.

Une facture dactylographiée est valide si elle contient un tampon, une
signature et chacun des champs requis ; une facture manuscrite est
déclarée non prise en charge.
"""

import logging
from collections.abc import Mapping, Sequence

from ..config import ValidationCriteria
from ..models.detection import Detection
from ..models.document import CLASS_ORDER, FieldClass
from ..models.ocr import TokenPrediction
from ..models.report import CriterionResult, Evidence, EvidenceKind, ValidationReport, Verdict

logger = logging.getLogger(__name__)

REPORT_NOTES = (
    "token metrics: micro average over non-Other classes",
    "detection metrics: COCO 101-point interpolated AP",
    "ocr accuracy: exact match rate of aligned words (case-folded, edge punctuation trimmed)",
    "ocr similarity: mean 1 - levenshtein/max_len over aligned words",
)


def _field_criterion(
    cls: FieldClass, predictions: Sequence[TokenPrediction], threshold: float
) -> CriterionResult:
    candidates = [p for p in predictions if p.label is cls and p.confidence >= threshold]
    evidence = None
    if candidates:
        # Égalités : premier token dans l'ordre de lecture.
        best = max(candidates, key=lambda p: p.confidence)
        evidence = Evidence(
            kind=EvidenceKind.TOKEN,
            text=best.token.text,
            box=best.token.box.as_tuple(),
            score=best.confidence,
        )
    return CriterionResult(
        name=f"field:{cls.value}",
        field_class=cls,
        satisfied=bool(candidates),
        evidence=evidence,
        candidates=len(candidates),
    )


def _object_criterion(
    cls: FieldClass, detections: Sequence[Detection], threshold: float
) -> CriterionResult:
    candidates = sorted(
        (d for d in detections if d.field_class is cls and d.score >= threshold),
        key=Detection.sort_key,
    )
    evidence = None
    if candidates:
        best = candidates[0]
        evidence = Evidence(
            kind=EvidenceKind.DETECTION, box=best.box.as_tuple(), score=best.score
        )
    return CriterionResult(
        name=cls.value.lower(),
        field_class=cls,
        satisfied=bool(candidates),
        evidence=evidence,
        candidates=len(candidates),
    )


def validate(
    predictions: Sequence[TokenPrediction],
    detections: Sequence[Detection],
    handwritten: bool,
    criteria: ValidationCriteria | None = None,
    document_id: str = "",
    config_fingerprint: str = "",
    postprocessing: Mapping[str, float] | None = None,
) -> ValidationReport:
    """
    Évalue les critères de validité d'un document.

    Un champ requis est satisfait si au moins un token de sa classe a une
    confiance ≥ min_field_confidence ; tampon et signature, si au moins une
    détection de leur classe a un score ≥ min_detection_score. Critères
    rapportés dans l'ordre des classes, tampon puis signature en dernier.

    Args:
        predictions: Tokens classés
        detections: Détections filtrées et passées par la NMS
        handwritten: Document manuscrit
        criteria: Critères (défaut : cinq champs, tampon, signature)
        document_id: Identifiant du document
        config_fingerprint: Empreinte de la configuration du pipeline
        postprocessing: Seuils de post-traitement des détections

    Returns:
        Rapport de validation
    """
    criteria = criteria or ValidationCriteria()
    common = {
        "document_id": document_id,
        "criteria_snapshot": criteria.snapshot(),
        "config_fingerprint": config_fingerprint,
        "postprocessing": dict(postprocessing or {}),
        "notes": REPORT_NOTES,
    }
    if handwritten:
        return ValidationReport(verdict=Verdict.UNSUPPORTED, **common)

    results = [
        _field_criterion(cls, predictions, criteria.min_field_confidence)
        for cls in CLASS_ORDER
        if cls in criteria.required_fields
    ]
    if criteria.require_stamp:
        results.append(
            _object_criterion(FieldClass.STAMP, detections, criteria.min_detection_score)
        )
    if criteria.require_signature:
        results.append(
            _object_criterion(FieldClass.SIGNATURE, detections, criteria.min_detection_score)
        )

    verdict = Verdict.VALID if all(r.satisfied for r in results) else Verdict.INVALID
    logger.debug("%s: %s", document_id, verdict.value)
    return ValidationReport(verdict=verdict, criteria=tuple(results), **common)


def explain(report: ValidationReport) -> list[str]:
    """
    Résumé lisible d'un rapport.

    Première ligne : verdict (et critères en échec) ; puis une ligne par
    critère. Un rapport Unsupported tient sur une seule ligne.

    Args:
        report: Rapport de validation

    Returns:
        Lignes de texte
    """
    if report.verdict is Verdict.UNSUPPORTED:
        return [f"{report.document_id}: Unsupported (handwritten document, criteria not evaluated)"]

    failed = report.failed_criteria
    if failed:
        head = f"{report.document_id}: Invalid, failed: {', '.join(c.name for c in failed)}"
    else:
        head = f"{report.document_id}: Valid"

    lines = [head]
    for criterion in report.criteria:
        if criterion.satisfied and criterion.evidence is not None:
            ev = criterion.evidence
            what = f"'{ev.text}'" if ev.text is not None else ev.kind.value
            box = ",".join(f"{c:g}" for c in ev.box)
            lines.append(f"  {criterion.name}: satisfied ({what} [{box}] score {ev.score:.2f})")
        else:
            lines.append(f"  {criterion.name}: missing")
    return lines
