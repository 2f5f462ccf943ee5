"""
Métriques d'évaluation.

- classification de tokens : précision, rappel, F1 (moyenne micro, Other exclu) ;
- détection : AP interpolée sur 101 points de rappel (convention COCO),
  mAP@0.50 et mAP@[.50:.95].
"""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..exceptions import LengthMismatchError, ZeroGoldError
from ..models.bounding_box import BBox
from ..models.detection import Detection
from ..models.document import CLASS_ORDER, OBJECT_CLASSES, Annotation, FieldClass
from ..models.evaluation import ClassScores, DetectionEvalReport, TokenEvalReport

logger = logging.getLogger(__name__)

RECALL_THRESHOLDS = np.arange(101) / 100.0
IOU_THRESHOLDS: tuple[float, ...] = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


# ==================== TOKENS ====================


def f1_score(precision: float, recall: float) -> float:
    """Moyenne harmonique de la précision et du rappel (0 si les deux sont nuls)."""
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _ratio(hits: int, misses: int, opposite: int) -> float:
    if hits + misses == 0:
        return 1.0 if opposite == 0 else 0.0
    return hits / (hits + misses)


def _scores(tp: int, fp: int, fn: int) -> ClassScores:
    precision = _ratio(tp, fp, fn)
    recall = _ratio(tp, fn, fp)
    return ClassScores(precision, recall, f1_score(precision, recall), tp + fn, tp, fp, fn)


def precision_recall_f1(
    predicted: Sequence[FieldClass], gold: Sequence[FieldClass]
) -> TokenEvalReport:
    """
    Précision, rappel et F1 de la classification de tokens.

    Pour chaque classe c ≠ Other : TP = prédit c et attendu c ; FP = prédit
    c, attendu autre chose ; FN = attendu c, prédit autre chose. La moyenne
    micro somme ces comptes ; la moyenne macro moyenne les classes
    présentes (attendues ou prédites).

    Args:
        predicted: Étiquettes prédites
        gold: Étiquettes de référence, alignées

    Returns:
        Rapport d'évaluation

    Raises:
        LengthMismatchError: Séquences de longueurs différentes
    """
    if len(predicted) != len(gold):
        raise LengthMismatchError(
            f"{len(predicted)} prédiction(s) pour {len(gold)} étiquette(s) de référence"
        )
    pred = np.array([FieldClass(p).index for p in predicted], dtype=np.int64)
    ref = np.array([FieldClass(g).index for g in gold], dtype=np.int64)

    per_class: dict[FieldClass, ClassScores] = {}
    totals = np.zeros(3, dtype=np.int64)
    present: list[ClassScores] = []
    for cls in CLASS_ORDER:
        if cls is FieldClass.OTHER:
            continue
        is_pred, is_gold = pred == cls.index, ref == cls.index
        tp = int(np.sum(is_pred & is_gold))
        fp = int(np.sum(is_pred & ~is_gold))
        fn = int(np.sum(is_gold & ~is_pred))
        scores = _scores(tp, fp, fn)
        per_class[cls] = scores
        totals += (tp, fp, fn)
        if tp + fp + fn > 0:
            present.append(scores)

    micro = _scores(*(int(v) for v in totals))
    if present:
        p = float(np.mean([s.precision for s in present]))
        r = float(np.mean([s.recall for s in present]))
        f = float(np.mean([s.f1 for s in present]))
        macro = ClassScores(p, r, f, micro.support)
    else:
        macro = ClassScores(1.0, 1.0, 1.0, 0)
    return TokenEvalReport(per_class=per_class, micro=micro, macro=macro)


def render_token_table(rows: Mapping[str, TokenEvalReport]) -> str:
    """
    Tableau texte Precision / Recall / F1 (moyennes micro), une ligne par run.

    Args:
        rows: Rapports par nom de configuration (ex: moteur OCR)
    """
    frame = pd.DataFrame(
        [
            {
                "Configuration": name,
                "Precision": f"{report.micro.precision:.2f}",
                "Recall": f"{report.micro.recall:.2f}",
                "F1": f"{report.micro.f1:.2f}",
            }
            for name, report in rows.items()
        ],
        columns=["Configuration", "Precision", "Recall", "F1"],
    )
    return frame.to_string(index=False)


# ==================== DÉTECTION ====================


@dataclass(frozen=True)
class MatchResult:
    """
    Appariement des détections d'une image et d'une classe.

    Attributes:
        detections: Détections triées par score décroissant
        flags: True (TP) ou False (FP), par détection triée
        false_negatives: Vérités terrain non appariées
    """

    detections: tuple[Detection, ...]
    flags: tuple[bool, ...]
    false_negatives: int


def match_detections(
    detections: Sequence[Detection], gold: Sequence[BBox], iou_threshold: float
) -> MatchResult:
    """
    Appariement glouton détections / vérités terrain (une image, une classe).

    Chaque détection, par score décroissant, est appariée à la vérité
    terrain libre de plus fort IoU si cet IoU atteint le seuil (égalités :
    indice le plus faible).

    Args:
        detections: Détections
        gold: Boîtes de vérité terrain
        iou_threshold: Seuil d'IoU

    Returns:
        Drapeaux TP/FP et nombre de faux négatifs
    """
    ordered = tuple(sorted(detections, key=Detection.sort_key))
    matched = [False] * len(gold)
    flags = []
    for det in ordered:
        best, best_iou = -1, -1.0
        for j, box in enumerate(gold):
            if matched[j]:
                continue
            iou = det.box.iou(box)
            if iou >= iou_threshold and iou > best_iou:
                best, best_iou = j, iou
        if best >= 0:
            matched[best] = True
        flags.append(best >= 0)
    return MatchResult(ordered, tuple(flags), matched.count(False))


def average_precision(flags: Sequence[bool], n_gold: int) -> float:
    """
    AP interpolée sur 101 points de rappel.

    p_interp(r) = précision maximale atteinte à un rappel ≥ r, moyennée sur
    r ∈ {0, 0.01, ..., 1}.

    Args:
        flags: TP/FP triés globalement par score décroissant
        n_gold: Nombre de vérités terrain

    Returns:
        AP dans [0, 1]

    Raises:
        ZeroGoldError: Si n_gold = 0
    """
    if n_gold <= 0:
        raise ZeroGoldError("AP indéfinie sans vérité terrain")
    if len(flags) == 0:
        return 0.0

    hits = np.asarray(flags, dtype=bool)
    tp = np.cumsum(hits)
    fp = np.cumsum(~hits)
    recall = tp / n_gold
    precision = tp / (tp + fp)

    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_THRESHOLDS, side="left")
    interpolated = np.where(idx < len(envelope), envelope[np.minimum(idx, len(envelope) - 1)], 0.0)
    return float(np.mean(interpolated))


def _gold_boxes(annotations: Sequence[Annotation], cls: FieldClass) -> list[BBox]:
    return [a.box for a in annotations if a.field_class is cls]


def mean_ap(
    detections: Mapping[str, Sequence[Detection]],
    golds: Mapping[str, Sequence[Annotation]],
    classes: Sequence[FieldClass] = OBJECT_CLASSES,
    thresholds: Sequence[float] = IOU_THRESHOLDS,
) -> DetectionEvalReport:
    """
    AP par classe et par seuil, mAP@0.50 et mAP@[.50:.95].

    Les détections de toutes les images sont réunies puis triées par score
    décroissant, identifiant d'image puis boîte. Les classes sans vérité
    terrain sont exclues des moyennes et listées dans le rapport.

    Args:
        detections: Détections par identifiant d'image
        golds: Annotations de vérité terrain par identifiant d'image
        classes: Classes évaluées
        thresholds: Seuils d'IoU (le premier doit être 0.5 pour mAP@0.50)

    Returns:
        Rapport de détection
    """
    images = sorted(set(detections) | set(golds))
    ap: dict[FieldClass, dict[float, float]] = {}
    excluded: list[FieldClass] = []

    for cls in classes:
        n_gold = sum(len(_gold_boxes(golds.get(i, ()), cls)) for i in images)
        if n_gold == 0:
            excluded.append(cls)
            logger.info("Classe %s sans vérité terrain : exclue du mAP", cls.value)
            continue
        ap[cls] = {}
        for t in thresholds:
            pooled = []
            for image_id in images:
                dets = [d for d in detections.get(image_id, ()) if d.field_class is cls]
                result = match_detections(dets, _gold_boxes(golds.get(image_id, ()), cls), t)
                pooled.extend(
                    (-d.score, image_id, d.box.as_tuple(), flag)
                    for d, flag in zip(result.detections, result.flags)
                )
            pooled.sort(key=lambda item: item[:3])
            ap[cls][t] = average_precision([item[3] for item in pooled], n_gold)

    if ap:
        first = thresholds[0]
        map_50 = float(np.mean([per_t[first] for per_t in ap.values()]))
        map_50_95 = float(np.mean([v for per_t in ap.values() for v in per_t.values()]))
    else:
        map_50 = map_50_95 = 0.0
    return DetectionEvalReport(
        ap=ap,
        map_50=map_50,
        map_50_95=map_50_95,
        thresholds=tuple(thresholds),
        excluded_classes=tuple(excluded),
    )


def render_detection_table(rows: Mapping[str, DetectionEvalReport]) -> str:
    """Tableau texte mAP@0.50 / mAP@50:95 (×100, 2 décimales), une ligne par modèle."""
    frame = pd.DataFrame(
        [
            {
                "Model": name,
                "mAP@0.50": f"{report.map_50 * 100:.2f}",
                "mAP@50:95": f"{report.map_50_95 * 100:.2f}",
            }
            for name, report in rows.items()
        ],
        columns=["Model", "mAP@0.50", "mAP@50:95"],
    )
    return frame.to_string(index=False)
