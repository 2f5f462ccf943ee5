"""
Métriques de comparaison de moteurs OCR et ordre de lecture.

La similarité est la moyenne de 1 - d / max(|a|, |b|) sur les paires de
mots alignés (d : distance de Levenshtein) ; l'exactitude est la part des
mots de référence retrouvés à l'identique (casse et ponctuation de bord
ignorées).
"""

import string
from collections.abc import Sequence
from itertools import zip_longest

import Levenshtein
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..models.ocr import OcrToken

LINE_OVERLAP_RATIO = 0.5
ALIGNMENT_IOU = 0.5

Words = Sequence[str] | Sequence[OcrToken]


def levenshtein(a: str, b: str) -> int:
    """
    Distance d'édition (insertion, suppression, substitution à coût 1).

    Args:
        a: Première chaîne
        b: Seconde chaîne

    Returns:
        Nombre minimal d'éditions

    Exemple:
        >>> levenshtein("kitten", "sitting")
        3
    """
    return Levenshtein.distance(a, b)


def _pair_similarity(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def _normalize(word: str) -> str:
    return word.casefold().strip(string.punctuation + string.whitespace)


def _text(item: str | OcrToken) -> str:
    return item.text if isinstance(item, OcrToken) else item


def align_words(predicted: Words, reference: Words) -> list[tuple[str, str]]:
    """
    Aligne deux listes de mots.

    Avec des tokens à boîtes des deux côtés, l'appariement est glouton par
    IoU décroissant (IoU ≥ 0.5) ; sinon les mots sont appariés dans l'ordre.
    Les mots non appariés sont associés à la chaîne vide.

    Returns:
        Paires (prédit, référence)
    """
    boxed = (
        predicted
        and reference
        and all(isinstance(t, OcrToken) for t in predicted)
        and all(isinstance(t, OcrToken) for t in reference)
    )
    if not boxed:
        return [
            (_text(p), _text(r))
            for p, r in zip_longest(predicted, reference, fillvalue="")
        ]

    candidates = sorted(
        (
            (-p.box.iou(r.box), i, j)
            for i, p in enumerate(predicted)
            for j, r in enumerate(reference)
            if p.box.iou(r.box) >= ALIGNMENT_IOU
        )
    )
    used_pred: set[int] = set()
    used_ref: set[int] = set()
    pairs: list[tuple[str, str]] = []
    for _, i, j in candidates:
        if i in used_pred or j in used_ref:
            continue
        used_pred.add(i)
        used_ref.add(j)
        pairs.append((predicted[i].text, reference[j].text))

    pairs.extend((p.text, "") for i, p in enumerate(predicted) if i not in used_pred)
    pairs.extend(("", r.text) for j, r in enumerate(reference) if j not in used_ref)
    return pairs


def text_similarity(predicted: Words, reference: Words) -> float:
    """
    Similarité moyenne des mots alignés, dans [0, 1].

    Args:
        predicted: Mots (ou tokens) reconnus
        reference: Mots (ou tokens) de référence

    Returns:
        1.0 pour deux listes vides ; 0.0 si un seul côté est vide
    """
    pairs = align_words(predicted, reference)
    if not pairs:
        return 1.0
    return float(np.mean([_pair_similarity(a, b) for a, b in pairs]))


def word_accuracy(predicted: Words, reference: Words) -> float:
    """
    Part des mots de référence retrouvés exactement parmi les prédictions alignées.

    Args:
        predicted: Mots (ou tokens) reconnus
        reference: Mots (ou tokens) de référence

    Returns:
        Ratio dans [0, 1] (référence vide : 1.0 si rien n'est prédit, 0.0 sinon)
    """
    if not reference:
        return 0.0 if predicted else 1.0
    pairs = align_words(predicted, reference)
    hits = sum(1 for p, r in pairs if r and _normalize(p) == _normalize(r))
    return hits / len(reference)


def sort_reading_order(tokens: Sequence[OcrToken]) -> list[OcrToken]:
    """
    Ordonne les tokens ligne par ligne, de gauche à droite.

    Deux tokens sont sur la même ligne si leur recouvrement vertical atteint
    50 % de la plus petite hauteur (relation close par transitivité). Les
    lignes sont triées par bord haut, les tokens d'une ligne par x_min ;
    les égalités conservent l'ordre d'entrée.

    Args:
        tokens: Tokens d'une même page

    Returns:
        Permutation des tokens dans l'ordre de lecture
    """
    if not tokens:
        return []

    top = np.array([t.box.y_min for t in tokens])
    bottom = np.array([t.box.y_max for t in tokens])
    height = bottom - top

    overlap = np.minimum.outer(bottom, bottom) - np.maximum.outer(top, top)
    same_line = overlap >= LINE_OVERLAP_RATIO * np.minimum.outer(height, height)
    _, line_of = connected_components(csr_matrix(same_line), directed=False)

    line_top = {line: top[line_of == line].min() for line in np.unique(line_of)}
    order = sorted(
        range(len(tokens)),
        key=lambda i: (line_top[line_of[i]], tokens[i].box.x_min, i),
    )
    return [tokens[i] for i in order]
