"""
Fonctions de perte et leurs gradients analytiques.

Bibliothèque numérique utilisable par un harnais d'entraînement externe :
entropie croisée, focal loss (softmax et sigmoïde), smooth L1, perte IoU
et cible de centralité. Tous les calculs sont en float64.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import expit, log_softmax

from ..exceptions import (
    IndexOutOfRangeError,
    InvalidParamsError,
    LocationOutsideBoxError,
    LossError,
)
from ..models.bounding_box import BBox

Vector = Sequence[float] | np.ndarray


@dataclass(frozen=True)
class FocalParams:
    """
    Paramètres de la focal loss.

    Attributes:
        gamma: Exposant de focalisation (≥ 0)
        alpha: Poids par classe dans (0, 1] (None : 1 pour toutes les classes)
    """

    gamma: float = 2.0
    alpha: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise LossError(f"gamma doit être fini et ≥ 0: {self.gamma}")
        if self.alpha is not None:
            object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
            if not all(0.0 < a <= 1.0 for a in self.alpha):
                raise LossError(f"Poids alpha hors de (0, 1]: {self.alpha}")

    def weight(self, target: int, n_classes: int) -> float:
        if self.alpha is None:
            return 1.0
        if len(self.alpha) != n_classes:
            raise LossError(f"{len(self.alpha)} poids alpha pour {n_classes} classes")
        return self.alpha[target]


def _logits(logits: Vector, target: int) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1 or z.size == 0:
        raise LossError("Vecteur de logits non vide attendu")
    if not np.all(np.isfinite(z)):
        raise LossError("Logits non finis")
    if not 0 <= target < z.size:
        raise IndexOutOfRangeError(f"Classe {target} hors de [0, {z.size})")
    return z


def _one_hot(target: int, size: int) -> np.ndarray:
    onehot = np.zeros(size)
    onehot[target] = 1.0
    return onehot


# ==================== ENTROPIE CROISÉE ====================


def cross_entropy(logits: Vector, target: int) -> float:
    """
    Entropie croisée -log softmax(logits)[target] (forme stable).

    Exemple:
        >>> round(cross_entropy([2.0, 1.0, 0.0], 0), 4)
        0.4076
    """
    z = _logits(logits, target)
    return float(-log_softmax(z)[target])


def cross_entropy_grad(logits: Vector, target: int) -> np.ndarray:
    """Gradient de l'entropie croisée par rapport aux logits : softmax - one_hot."""
    z = _logits(logits, target)
    return np.exp(log_softmax(z)) - _one_hot(target, z.size)


# ==================== FOCAL LOSS ====================


def _focal_terms(z: np.ndarray, target: int) -> tuple[np.ndarray, float, float]:
    log_p = log_softmax(z)
    probs = np.exp(log_p)
    log_pt = float(log_p[target])
    # 1 - p_t sans annulation catastrophique
    one_minus = float(-np.expm1(log_pt))
    return probs, log_pt, one_minus


def focal_loss(logits: Vector, target: int, params: FocalParams | None = None) -> float:
    """
    Focal loss softmax : alpha[t] · (1 - p_t)^gamma · (-log p_t).

    Args:
        logits: Logits de toutes les classes
        target: Indice de la classe attendue
        params: gamma et alpha (défaut : gamma 2, alpha 1)

    Returns:
        Perte ≥ 0
    """
    params = params or FocalParams()
    z = _logits(logits, target)
    _, log_pt, one_minus = _focal_terms(z, target)
    weight = params.weight(target, z.size)
    return weight * one_minus**params.gamma * -log_pt


def focal_loss_grad(logits: Vector, target: int, params: FocalParams | None = None) -> np.ndarray:
    """
    Gradient de la focal loss par rapport aux logits.

    dL/dz_j = alpha[t] · [gamma (1-p_t)^(gamma-1) p_t log p_t - (1-p_t)^gamma] · (δ_tj - p_j)
    """
    params = params or FocalParams()
    z = _logits(logits, target)
    probs, log_pt, one_minus = _focal_terms(z, target)
    gamma = params.gamma
    p_t = math.exp(log_pt)

    if gamma == 0 or one_minus == 0:
        focus = 0.0
    else:
        focus = gamma * one_minus ** (gamma - 1) * p_t * log_pt
    coefficient = params.weight(target, z.size) * (focus - one_minus**gamma)
    return coefficient * (_one_hot(target, z.size) - probs)


def sigmoid_focal_loss(logit: float, target: int, gamma: float = 2.0, alpha: float = 0.25) -> float:
    """
    Focal loss binaire (par ancre) des détecteurs à une étape.

    L = -alpha_t · (1 - p_t)^gamma · log p_t, avec p = sigmoid(logit),
    p_t = p si target = 1 sinon 1 - p, alpha_t = alpha si target = 1 sinon 1 - alpha.
    """
    log_pt, pt, alpha_t, _ = _binary_terms(logit, target, gamma, alpha)
    return alpha_t * (1.0 - pt) ** gamma * -log_pt


def sigmoid_focal_loss_grad(
    logit: float, target: int, gamma: float = 2.0, alpha: float = 0.25
) -> float:
    """Dérivée de sigmoid_focal_loss par rapport au logit."""
    log_pt, pt, alpha_t, sign = _binary_terms(logit, target, gamma, alpha)
    one_minus = 1.0 - pt
    return sign * alpha_t * (gamma * one_minus**gamma * pt * log_pt - one_minus ** (gamma + 1))


def _binary_terms(
    logit: float, target: int, gamma: float, alpha: float
) -> tuple[float, float, float, float]:
    if target not in (0, 1):
        raise IndexOutOfRangeError(f"Cible binaire attendue (0 ou 1): {target}")
    if not math.isfinite(logit):
        raise LossError("Logit non fini")
    if not (math.isfinite(gamma) and gamma >= 0) or not 0.0 < alpha <= 1.0:
        raise LossError(f"Paramètres invalides: gamma={gamma}, alpha={alpha}")
    sign = 1.0 if target == 1 else -1.0
    log_pt = -float(np.logaddexp(0.0, -sign * logit))
    pt = float(expit(sign * logit))
    alpha_t = alpha if target == 1 else 1.0 - alpha
    return log_pt, pt, alpha_t, sign


# ==================== RÉGRESSION DE BOÎTES ====================


def _coords(box: BBox | Vector) -> np.ndarray:
    values = box.as_tuple() if isinstance(box, BBox) else box
    array = np.asarray(values, dtype=np.float64)
    if array.shape != (4,):
        raise LossError(f"4 coordonnées attendues, reçu {array.shape}")
    return array


def smooth_l1(pred: BBox | Vector, gold: BBox | Vector, beta: float = 1.0) -> float:
    """
    Smooth L1 : somme de 0.5 d² / beta si |d| < beta, sinon |d| - 0.5 beta.

    Args:
        pred: Coordonnées prédites
        gold: Coordonnées de référence
        beta: Point de transition (> 0)

    Raises:
        InvalidParamsError: Si beta ≤ 0
    """
    if beta <= 0:
        raise InvalidParamsError(f"beta doit être > 0: {beta}")
    d = _coords(pred) - _coords(gold)
    ad = np.abs(d)
    return float(np.sum(np.where(ad < beta, 0.5 * d * d / beta, ad - 0.5 * beta)))


def smooth_l1_grad(pred: BBox | Vector, gold: BBox | Vector, beta: float = 1.0) -> np.ndarray:
    """Gradient de smooth_l1 par rapport aux coordonnées prédites."""
    if beta <= 0:
        raise InvalidParamsError(f"beta doit être > 0: {beta}")
    d = _coords(pred) - _coords(gold)
    return np.where(np.abs(d) < beta, d / beta, np.sign(d))


def iou_loss(pred: BBox, gold: BBox, form: Literal["linear", "log"] = "linear") -> float:
    """
    Perte IoU : 1 - IoU (linéaire) ou -ln IoU (logarithmique).

    Raises:
        LossError: Forme inconnue, ou forme logarithmique avec IoU nulle
    """
    iou = pred.iou(gold)
    if form == "linear":
        return 1.0 - iou
    if form == "log":
        if iou == 0.0:
            raise LossError("IoU nulle : -ln IoU indéfini")
        return -math.log(iou)
    raise LossError(f"Forme de perte IoU inconnue: {form}")


def centerness_target(location: tuple[float, float], gold: BBox) -> float:
    """
    Cible de centralité d'un point dans sa boîte de référence.

    sqrt( min(l, r)/max(l, r) · min(t, b)/max(t, b) ), l, r, t, b étant les
    distances du point aux quatre côtés.

    Raises:
        LocationOutsideBoxError: Point hors de la boîte ou sur un bord
    """
    x, y = location
    if not gold.contains_point(x, y):
        raise LocationOutsideBoxError(f"Point ({x}, {y}) hors de {gold}")
    left, right = x - gold.x_min, gold.x_max - x
    top, bottom = y - gold.y_min, gold.y_max - y
    return math.sqrt((min(left, right) / max(left, right)) * (min(top, bottom) / max(top, bottom)))
