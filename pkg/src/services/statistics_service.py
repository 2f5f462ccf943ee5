"""
Statistiques de jeux de données : distribution des classes annotées et
comptes d'instances par étiquette de token, par moteur OCR.
"""

import logging
import math
from collections import Counter
from collections.abc import Iterable, Mapping
from pathlib import Path

import pandas as pd

from ..models.document import ANNOTATION_CLASSES, DatasetManifest, FieldClass

logger = logging.getLogger(__name__)

# Colonnes du tableau des comptes d'instances, dans l'ordre de publication.
INSTANCE_COLUMNS: tuple[tuple[str, FieldClass], ...] = (
    ("O", FieldClass.OTHER),
    ("Title", FieldClass.TITLE),
    ("Date", FieldClass.DATE),
    ("Client", FieldClass.CLIENT),
    ("Total", FieldClass.TOTAL),
    ("Total Value", FieldClass.TOTAL_VALUE),
)
ROW_HEADER = "OCR"


def class_distribution(manifest: DatasetManifest | Iterable) -> dict[FieldClass, int]:
    """
    Compte les annotations par classe.

    Args:
        manifest: Manifeste (ou itérable de documents)

    Returns:
        Effectif de chaque classe annotable (zéros compris)
    """
    counts = Counter(a.field_class for record in manifest for a in record.annotations)
    return {c: counts.get(c, 0) for c in ANNOTATION_CLASSES}


def imbalance_ratio(counts: Mapping[FieldClass, int]) -> float:
    """
    Rapport entre les tokens Other et les tokens de champ.

    Returns:
        O / (somme des autres classes) ; inf si aucun token de champ mais des O
    """
    other = counts.get(FieldClass.OTHER, 0)
    fields = sum(n for c, n in counts.items() if c is not FieldClass.OTHER)
    if fields == 0:
        return float("inf") if other else 0.0
    return other / fields


def imbalance_summary(rows: Mapping[str, Mapping[FieldClass, int]]) -> dict[str, float | None]:
    """Ratios O / champs par moteur, sérialisables en JSON (None si aucun token de champ)."""
    summary: dict[str, float | None] = {}
    for name, counts in rows.items():
        ratio = imbalance_ratio(counts)
        summary[name] = ratio if math.isfinite(ratio) else None
    return summary


def instance_frame(rows: Mapping[str, Mapping[FieldClass, int]]) -> pd.DataFrame:
    """Tableau des comptes d'instances, une ligne par moteur OCR."""
    return pd.DataFrame(
        [
            {ROW_HEADER: name, **{label: int(counts.get(cls, 0)) for label, cls in INSTANCE_COLUMNS}}
            for name, counts in rows.items()
        ],
        columns=[ROW_HEADER, *(label for label, _ in INSTANCE_COLUMNS)],
    )


def render_instance_table(rows: Mapping[str, Mapping[FieldClass, int]]) -> str:
    """
    Tableau texte aligné des comptes d'instances.

    Première colonne alignée à gauche, comptes alignés à droite, colonnes
    séparées par deux espaces.

    Args:
        rows: Comptes par nom de moteur OCR

    Returns:
        Tableau terminé par un saut de ligne
    """
    headers = [ROW_HEADER, *(label for label, _ in INSTANCE_COLUMNS)]
    body = [
        [name, *(str(int(counts.get(cls, 0))) for _, cls in INSTANCE_COLUMNS)]
        for name, counts in rows.items()
    ]
    widths = [max(len(r[i]) for r in [headers, *body]) for i in range(len(headers))]

    def line(cells: list[str]) -> str:
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        return "  ".join([first, *rest]).rstrip()

    return "\n".join(line(r) for r in [headers, *body]) + "\n"


def instance_table_csv(rows: Mapping[str, Mapping[FieldClass, int]]) -> str:
    """Comptes d'instances au format CSV."""
    return instance_frame(rows).to_csv(index=False, lineterminator="\n")


def plot_class_distribution(
    counts: Mapping[FieldClass, int], path: str | Path, title: str = "Class distribution"
) -> Path:
    """
    Enregistre un diagramme en barres de la distribution des classes.

    Args:
        counts: Effectifs par classe
        path: Fichier image de sortie (PNG)
        title: Titre du graphique

    Returns:
        Chemin écrit
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = [c.value for c in counts]
    values = [counts[c] for c in counts]

    fig, ax = plt.subplots(figsize=(8, 4.5), constrained_layout=True)
    bars = ax.bar(labels, values, color="#4C72B0")
    ax.bar_label(bars)
    ax.set_ylabel("Instances")
    ax.set_title(title)
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(target, dpi=150)
    plt.close(fig)
    logger.info("Distribution des classes enregistrée dans %s", target)
    return target
