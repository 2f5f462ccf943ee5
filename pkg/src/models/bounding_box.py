"""Modèle pour les boîtes englobantes en pixels."""

import math
from collections.abc import Sequence
from dataclasses import dataclass

from ..exceptions import InvalidBoxError


@dataclass(frozen=True)
class BBox:
    """
    Représente une boîte englobante alignée sur les axes, en pixels.

    Format coin : (x_min, y_min, x_max, y_max), origine en haut à gauche.

    Attributes:
        x_min: Abscisse du bord gauche
        y_min: Ordonnée du bord haut
        x_max: Abscisse du bord droit
        y_max: Ordonnée du bord bas

    Raises:
        InvalidBoxError: Si la boîte est inversée, d'aire nulle,
            non finie ou avec des coordonnées négatives.

    Exemple:
        >>> box = BBox(10, 20, 40, 30)
        >>> box.area
        300.0
    """

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        coords = (self.x_min, self.y_min, self.x_max, self.y_max)
        for name, value in zip(("x_min", "y_min", "x_max", "y_max"), coords):
            object.__setattr__(self, name, float(value))
        if not all(math.isfinite(c) for c in coords):
            raise InvalidBoxError(f"Coordonnées non finies: {coords}")
        if min(coords) < 0:
            raise InvalidBoxError(f"Coordonnées négatives: {coords}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidBoxError(f"Boîte inversée ou vide: {coords}")

    @classmethod
    def from_list(cls, values: Sequence[float]) -> "BBox":
        """
        Construit une boîte depuis [x_min, y_min, x_max, y_max].

        Args:
            values: Séquence de 4 nombres

        Returns:
            La boîte construite
        """
        if len(values) != 4:
            raise InvalidBoxError(f"4 coordonnées attendues, reçu {len(values)}")
        return cls(*values)

    def to_list(self) -> list[float]:
        """Convertit la boîte en liste [x_min, y_min, x_max, y_max]."""
        return [self.x_min, self.y_min, self.x_max, self.y_max]

    def as_tuple(self) -> tuple[float, float, float, float]:
        """Tuple ordonnable (utilisé pour départager les égalités)."""
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def intersection_area(self, other: "BBox") -> float:
        """
        Calcule l'aire d'intersection avec une autre boîte.

        Args:
            other: Autre boîte

        Returns:
            Aire de l'intersection (0 si disjointes)
        """
        w = min(self.x_max, other.x_max) - max(self.x_min, other.x_min)
        h = min(self.y_max, other.y_max) - max(self.y_min, other.y_min)
        if w <= 0 or h <= 0:
            return 0.0
        return w * h

    def iou(self, other: "BBox") -> float:
        """
        Calcule l'intersection sur union (IoU).

        Args:
            other: Autre boîte

        Returns:
            Ratio dans [0, 1]
        """
        inter = self.intersection_area(other)
        if inter == 0.0:
            return 0.0
        return inter / (self.area + other.area - inter)

    def is_inside(self, width: float, height: float) -> bool:
        """Vérifie que la boîte tient dans une image width × height."""
        return self.x_max <= width and self.y_max <= height

    def clip(self, width: float, height: float) -> "BBox | None":
        """
        Restreint la boîte aux limites d'une image.

        Args:
            width: Largeur de l'image
            height: Hauteur de l'image

        Returns:
            La boîte restreinte, ou None si elle devient vide
        """
        x_min = min(max(self.x_min, 0.0), width)
        y_min = min(max(self.y_min, 0.0), height)
        x_max = min(max(self.x_max, 0.0), width)
        y_max = min(max(self.y_max, 0.0), height)
        if x_min >= x_max or y_min >= y_max:
            return None
        return BBox(x_min, y_min, x_max, y_max)

    def scale(self, sx: float, sy: float) -> "BBox":
        """Met la boîte à l'échelle par axe."""
        return BBox(self.x_min * sx, self.y_min * sy, self.x_max * sx, self.y_max * sy)

    def translate(self, dx: float, dy: float) -> "BBox":
        """Translate la boîte."""
        return BBox(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)

    def contains_point(self, x: float, y: float) -> bool:
        """Vérifie qu'un point est strictement à l'intérieur."""
        return self.x_min < x < self.x_max and self.y_min < y < self.y_max

    def union(self, other: "BBox") -> "BBox":
        """Plus petite boîte contenant les deux boîtes."""
        return BBox(
            min(self.x_min, other.x_min),
            min(self.y_min, other.y_min),
            max(self.x_max, other.x_max),
            max(self.y_max, other.y_max),
        )

    def __str__(self) -> str:
        return f"[{self.x_min:g},{self.y_min:g},{self.x_max:g},{self.y_max:g}]"


def bbox_iou(a: BBox, b: BBox) -> float:
    """
    Intersection sur union de deux boîtes valides.

    Args:
        a: Première boîte
        b: Seconde boîte

    Returns:
        area(a ∩ b) / area(a ∪ b), 0 si disjointes
    """
    return a.iou(b)


def envelope(points: Sequence[tuple[float, float]]) -> tuple[float, float, float, float]:
    """
    Enveloppe alignée sur les axes d'un ensemble de points.

    Args:
        points: Points (x, y)

    Returns:
        (x_min, y_min, x_max, y_max) sans validation
    """
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return (min(xs), min(ys), max(xs), max(ys))
