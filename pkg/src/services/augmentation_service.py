"""
Service d'augmentation de données tenant compte des boîtes.

Deux pipelines déterministes sous une graine :
- piste mots-clés : padding, flou médian, gigue, rotation (≤ 5°, garde de
  marge de 20 px), redimensionnement bilinéaire ;
- piste détection : rotation (≤ 10°, p=0.5), gigue (p=0.4), bruit
  multiplicatif par canal (p=0.3).
"""

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any, Literal

import cv2
import numpy as np

from ..config import DetectionAugConfig, KeywordAugConfig
from ..exceptions import InvalidAngleError, InvalidParamsError, UnsupportedDocumentError
from ..models.bounding_box import BBox, envelope
from ..models.document import DatasetManifest, DocumentImage, DocumentRecord
from .seeding import make_rng

logger = logging.getLogger(__name__)

INTERPOLATIONS = {
    "cubic": cv2.INTER_CUBIC,
    "linear": cv2.INTER_LINEAR,
    "nearest": cv2.INTER_NEAREST,
}
PAPER_WHITE = (255, 255, 255)
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float32)


class PhotometricKind(StrEnum):
    """Opérations photométriques (sans effet sur la géométrie)."""

    MEDIAN_BLUR = "median_blur"
    COLOR_JITTER = "color_jitter"
    MULTIPLICATIVE_NOISE = "multiplicative_noise"


@dataclass(frozen=True)
class RotationResult:
    """
    Résultat d'une rotation avec boîtes.

    Attributes:
        image: Image tournée (ou l'entrée si la garde s'est déclenchée)
        boxes: Enveloppes des boîtes tournées (ou les boîtes d'entrée)
        guard_triggered: True si la rotation a été annulée par la garde de marge
        angle_deg: Angle demandé
    """

    image: np.ndarray
    boxes: list[BBox]
    guard_triggered: bool
    angle_deg: float


@dataclass(frozen=True)
class AppliedOp:
    """Opération appliquée et ses paramètres tirés."""

    name: str
    params: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class AugmentationResult:
    """
    Document augmenté et trace des opérations.

    Attributes:
        record: Document augmenté
        trace: Opérations appliquées, dans l'ordre
        rotation_angle: Angle tiré (None si aucune rotation tirée)
        guard_triggered: True si la garde de marge a annulé la rotation
        post_rotation_boxes: Boîtes juste après l'étape de rotation
        post_rotation_size: (largeur, hauteur) juste après l'étape de rotation
    """

    record: DocumentRecord
    trace: tuple[AppliedOp, ...]
    rotation_angle: float | None = None
    guard_triggered: bool = False
    post_rotation_boxes: tuple[BBox, ...] = ()
    post_rotation_size: tuple[int, int] = (0, 0)

    def applied(self, name: str) -> bool:
        return any(op.name == name for op in self.trace)

    def params(self, name: str) -> dict[str, Any] | None:
        return next((op.params for op in self.trace if op.name == name), None)


# ==================== GÉOMÉTRIE ====================


def rotated_canvas_size(width: int, height: int, angle_deg: float) -> tuple[int, int]:
    """
    Dimensions du canevas élargi contenant toute l'image tournée.

    Args:
        width: Largeur de l'image
        height: Hauteur de l'image
        angle_deg: Angle de rotation en degrés

    Returns:
        (largeur, hauteur) du canevas
    """
    rad = math.radians(angle_deg)
    cos, sin = abs(math.cos(rad)), abs(math.sin(rad))
    new_w = math.ceil(round(height * sin + width * cos, 6))
    new_h = math.ceil(round(height * cos + width * sin, 6))
    return new_w, new_h


def _rotation_matrix(
    center: tuple[float, float], angle_deg: float, shift: tuple[float, float]
) -> np.ndarray:
    matrix = cv2.getRotationMatrix2D(center, angle_deg, 1.0)
    matrix[0, 2] += shift[0]
    matrix[1, 2] += shift[1]
    return matrix


def _rotate_box(box: BBox, matrix: np.ndarray) -> tuple[float, float, float, float]:
    corners = np.array(
        [
            [box.x_min, box.y_min],
            [box.x_max, box.y_min],
            [box.x_min, box.y_max],
            [box.x_max, box.y_max],
        ],
        dtype=np.float64,
    )
    rotated = corners @ matrix[:, :2].T + matrix[:, 2]
    return envelope([(float(x), float(y)) for x, y in rotated])


def rotate_with_boxes(
    image: np.ndarray,
    boxes: Sequence[BBox],
    angle_deg: float,
    interpolation: Literal["cubic", "linear", "nearest"] = "cubic",
    margin_px: float | None = None,
    max_angle_deg: float | None = None,
) -> RotationResult:
    """
    Tourne une image autour de son centre sur un canevas élargi.

    Chaque boîte est remplacée par l'enveloppe alignée de ses quatre coins
    tournés. Si margin_px est fourni et qu'une boîte tournée s'approche à
    moins de margin_px d'un bord, la rotation est annulée et l'entrée
    renvoyée telle quelle avec guard_triggered=True.

    Args:
        image: Tableau (H, W, 3) uint8
        boxes: Boîtes contenues dans l'image
        angle_deg: Angle en degrés (sens trigonométrique)
        interpolation: "cubic", "linear" ou "nearest"
        margin_px: Marge minimale boîte / bord (None : pas de garde)
        max_angle_deg: Borne de |angle_deg| (None : pas de borne)

    Returns:
        Résultat de la rotation

    Raises:
        InvalidAngleError: Si |angle_deg| dépasse max_angle_deg
        InvalidParamsError: Si l'interpolation est inconnue
    """
    if max_angle_deg is not None and abs(angle_deg) > max_angle_deg:
        raise InvalidAngleError(f"|{angle_deg}| > {max_angle_deg} degrés")
    if interpolation not in INTERPOLATIONS:
        raise InvalidParamsError(f"Interpolation inconnue: {interpolation}")
    if angle_deg == 0:
        return RotationResult(image, list(boxes), False, 0.0)

    height, width = image.shape[:2]
    new_w, new_h = rotated_canvas_size(width, height, angle_deg)
    shift = ((new_w - width) / 2.0, (new_h - height) / 2.0)

    # Boîtes en coordonnées continues, pixels indexés par leur centre.
    box_matrix = _rotation_matrix((width / 2.0, height / 2.0), angle_deg, shift)
    pixel_matrix = _rotation_matrix(((width - 1) / 2.0, (height - 1) / 2.0), angle_deg, shift)

    envelopes = [_rotate_box(box, box_matrix) for box in boxes]
    if margin_px is not None and margin_px > 0:
        for x_min, y_min, x_max, y_max in envelopes:
            if min(x_min, y_min, new_w - x_max, new_h - y_max) < margin_px:
                logger.debug("Garde de marge déclenchée (angle=%.3f°)", angle_deg)
                return RotationResult(image, list(boxes), True, angle_deg)

    rotated_boxes = []
    for coords in envelopes:
        clipped = BBox(*(max(c, 0.0) for c in coords)).clip(new_w, new_h)
        if clipped is None:
            raise InvalidParamsError(f"Boîte sortie du canevas après rotation: {coords}")
        rotated_boxes.append(clipped)

    rotated = cv2.warpAffine(
        np.ascontiguousarray(image),
        pixel_matrix,
        (new_w, new_h),
        flags=INTERPOLATIONS[interpolation],
        borderMode=cv2.BORDER_CONSTANT,
        borderValue=PAPER_WHITE,
    )
    return RotationResult(rotated, rotated_boxes, False, angle_deg)


def scale_with_boxes(
    image: np.ndarray, boxes: Sequence[BBox], target_w: int, target_h: int
) -> tuple[np.ndarray, list[BBox]]:
    """
    Redimensionne une image (bilinéaire) et ses boîtes.

    Args:
        image: Tableau (H, W, 3) uint8
        boxes: Boîtes de l'image
        target_w: Largeur cible
        target_h: Hauteur cible

    Returns:
        (image, boîtes) redimensionnées

    Raises:
        InvalidParamsError: Si une dimension cible n'est pas positive
    """
    if target_w <= 0 or target_h <= 0:
        raise InvalidParamsError(f"Dimensions cibles invalides: {target_w}x{target_h}")
    height, width = image.shape[:2]
    if (width, height) == (target_w, target_h):
        return image, list(boxes)

    resized = cv2.resize(
        np.ascontiguousarray(image), (target_w, target_h), interpolation=cv2.INTER_LINEAR
    )
    sx, sy = target_w / width, target_h / height
    scaled = []
    for box in boxes:
        clipped = box.scale(sx, sy).clip(target_w, target_h)
        if clipped is None:
            raise InvalidParamsError(f"Boîte dégénérée après redimensionnement: {box}")
        scaled.append(clipped)
    return resized, scaled


# ==================== PHOTOMÉTRIE ====================


def _uniform(rng: np.random.Generator | None, bounds: Sequence[float]) -> float:
    low, high = float(bounds[0]), float(bounds[1])
    if low > high:
        raise InvalidParamsError(f"Intervalle invalide: {bounds}")
    if low == high:
        return low
    if rng is None:
        raise InvalidParamsError("Un flux aléatoire est requis pour tirer les paramètres")
    return float(rng.uniform(low, high))


def resolve_photometric_params(
    kind: PhotometricKind,
    params: dict[str, Any],
    rng: np.random.Generator | None = None,
) -> dict[str, Any]:
    """
    Valide les paramètres et tire les valeurs aléatoires d'une opération.

    Args:
        kind: Type d'opération
        params: Paramètres (intervalles ou valeurs déjà tirées)
        rng: Flux aléatoire du document

    Returns:
        Paramètres concrets (facteurs, multiplicateurs)

    Raises:
        InvalidParamsError: Paramètres invalides
    """
    kind = PhotometricKind(kind)
    if kind is PhotometricKind.MEDIAN_BLUR:
        kernel = int(params.get("kernel", 3))
        if kernel < 1 or kernel % 2 == 0:
            raise InvalidParamsError(f"Noyau de flou médian impair attendu: {kernel}")
        return {"kernel": kernel}

    if kind is PhotometricKind.COLOR_JITTER:
        if "brightness_factor" in params:
            return {
                "brightness_factor": float(params["brightness_factor"]),
                "contrast_factor": float(params["contrast_factor"]),
                "saturation_factor": float(params["saturation_factor"]),
                "hue_shift": float(params["hue_shift"]),
            }
        hue = float(params.get("hue", 0.05))
        if not 0.0 <= hue <= 0.5:
            raise InvalidParamsError(f"Décalage de teinte hors de [0, 0.5]: {hue}")
        resolved = {
            "brightness_factor": _uniform(rng, params.get("brightness", (0.8, 1.2))),
            "contrast_factor": _uniform(rng, params.get("contrast", (0.8, 1.2))),
            "saturation_factor": _uniform(rng, params.get("saturation", (0.8, 1.2))),
            "hue_shift": _uniform(rng, (-hue, hue)),
        }
        if min(resolved["brightness_factor"], resolved["contrast_factor"], resolved["saturation_factor"]) < 0:
            raise InvalidParamsError("Facteurs de gigue négatifs")
        return resolved

    if "multipliers" in params:
        multipliers = [float(m) for m in params["multipliers"]]
        if len(multipliers) != DocumentImage.CHANNELS:
            raise InvalidParamsError("Un multiplicateur par canal attendu")
        return {"multipliers": multipliers}
    low, high = (float(v) for v in params.get("range", (0.5, 1.0)))
    if not 0.5 <= low <= high <= 1.0:
        raise InvalidParamsError(f"Multiplicateur hors de [0.5, 1.0]: {(low, high)}")
    if low == high:
        multipliers = [low] * DocumentImage.CHANNELS
    else:
        if rng is None:
            raise InvalidParamsError("Un flux aléatoire est requis pour tirer les paramètres")
        multipliers = [float(m) for m in rng.uniform(low, high, size=DocumentImage.CHANNELS)]
    return {"multipliers": multipliers}


def _color_jitter(image: np.ndarray, params: dict[str, Any]) -> np.ndarray:
    img = image.astype(np.float32) * params["brightness_factor"]

    mean = float((img @ LUMA_WEIGHTS).mean())
    img = (img - mean) * params["contrast_factor"] + mean

    gray = (img @ LUMA_WEIGHTS)[..., None]
    img = (img - gray) * params["saturation_factor"] + gray

    out = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    shift = int(round(params["hue_shift"] * 180))
    if shift:
        hsv = cv2.cvtColor(out, cv2.COLOR_RGB2HSV)
        hsv[..., 0] = ((hsv[..., 0].astype(np.int32) + shift) % 180).astype(np.uint8)
        out = cv2.cvtColor(hsv, cv2.COLOR_HSV2RGB)
    return out


def apply_photometric(
    image: np.ndarray,
    kind: PhotometricKind | str,
    params: dict[str, Any],
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """
    Applique une opération photométrique.

    Les dimensions sont conservées et les échantillons restreints à [0, 255].

    Args:
        image: Tableau (H, W, 3) uint8
        kind: median_blur, color_jitter ou multiplicative_noise
        params: Paramètres de l'opération
        rng: Flux aléatoire (requis si des valeurs sont à tirer)

    Returns:
        Nouvelle image

    Raises:
        InvalidParamsError: Paramètres invalides
    """
    kind = PhotometricKind(kind)
    resolved = resolve_photometric_params(kind, params, rng)
    source = np.ascontiguousarray(image)

    if kind is PhotometricKind.MEDIAN_BLUR:
        if resolved["kernel"] == 1:
            return source.copy()
        return cv2.medianBlur(source, resolved["kernel"])
    if kind is PhotometricKind.COLOR_JITTER:
        return _color_jitter(source, resolved)

    noisy = source.astype(np.float64) * np.asarray(resolved["multipliers"], dtype=np.float64)
    return np.clip(np.rint(noisy), 0, 255).astype(np.uint8)


# ==================== PIPELINES ====================


def _jitter_params(config: Any) -> dict[str, Any]:
    return {
        "brightness": config.brightness,
        "contrast": config.contrast,
        "saturation": config.saturation,
        "hue": config.hue,
    }


def _rebuild(record: DocumentRecord, image: np.ndarray, boxes: Sequence[BBox]) -> DocumentRecord:
    annotations = [a.with_box(b) for a, b in zip(record.annotations, boxes, strict=True)]
    return record.replace(image=DocumentImage(image), annotations=annotations)


def _keyword_margin(config: KeywordAugConfig, width: int, height: int, angle: float) -> float:
    # Le redimensionnement final réduit les distances : marge relevée d'autant.
    if config.resize_target is None:
        return config.crop_margin_px
    canvas_w, canvas_h = rotated_canvas_size(width, height, angle)
    target_w, target_h = config.resize_target
    factor = max(1.0, canvas_w / target_w, canvas_h / target_h)
    return config.crop_margin_px * factor


def augment_keyword(
    record: DocumentRecord, config: KeywordAugConfig, seed: int
) -> AugmentationResult:
    """
    Pipeline d'augmentation de la piste mots-clés.

    Ordre : padding → flou médian / gigue → rotation (avec garde)
    → redimensionnement. Chaque opération tire ses valeurs dans son propre
    flux (graine, document, rang de l'opération).

    Args:
        record: Document dactylographié
        config: Configuration de la piste
        seed: Graine maître

    Returns:
        Document augmenté et trace

    Raises:
        UnsupportedDocumentError: Si le document est manuscrit
    """
    if record.handwritten:
        raise UnsupportedDocumentError(f"Document manuscrit: {record.id}")

    image = np.asarray(record.image.pixels)
    boxes = record.boxes()
    trace: list[AppliedOp] = []

    rng = make_rng(seed, record.id, 0)
    if rng.random() < config.pad_probability:
        height, width = image.shape[:2]
        pad_x = int(round(config.pad_ratio * width))
        pad_y = int(round(config.pad_ratio * height))
        if pad_x or pad_y:
            image = cv2.copyMakeBorder(
                np.ascontiguousarray(image), pad_y, pad_y, pad_x, pad_x, cv2.BORDER_REPLICATE
            )
            boxes = [b.translate(pad_x, pad_y) for b in boxes]
        trace.append(AppliedOp("pad", {"left": pad_x, "top": pad_y}))

    rng = make_rng(seed, record.id, 1)
    if rng.random() < config.blur_probability:
        params = {"kernel": config.median_blur_kernel}
        image = apply_photometric(image, PhotometricKind.MEDIAN_BLUR, params)
        trace.append(AppliedOp("median_blur", params))

    rng = make_rng(seed, record.id, 2)
    if rng.random() < config.jitter.probability:
        params = resolve_photometric_params(
            PhotometricKind.COLOR_JITTER, _jitter_params(config.jitter), rng
        )
        image = apply_photometric(image, PhotometricKind.COLOR_JITTER, params)
        trace.append(AppliedOp("color_jitter", params))

    rng = make_rng(seed, record.id, 3)
    angle: float | None = None
    guard_triggered = False
    if config.max_rotation_deg > 0 and rng.random() < config.rotation_probability:
        angle = float(rng.uniform(-config.max_rotation_deg, config.max_rotation_deg))
        height, width = image.shape[:2]
        result = rotate_with_boxes(
            image,
            boxes,
            angle,
            config.rotation_interpolation,
            margin_px=_keyword_margin(config, width, height, angle),
            max_angle_deg=config.max_rotation_deg,
        )
        guard_triggered = result.guard_triggered
        if guard_triggered:
            trace.append(AppliedOp("rotate_skipped", {"angle": angle}))
        else:
            image, boxes = result.image, result.boxes
            trace.append(AppliedOp("rotate", {"angle": angle}))
    post_rotation_boxes = tuple(boxes)
    post_rotation_size = (int(image.shape[1]), int(image.shape[0]))

    if config.resize_target is not None:
        target_w, target_h = config.resize_target
        image, boxes = scale_with_boxes(image, boxes, target_w, target_h)
        trace.append(AppliedOp("resize", {"width": target_w, "height": target_h}))

    return AugmentationResult(
        record=_rebuild(record, image, boxes),
        trace=tuple(trace),
        rotation_angle=angle,
        guard_triggered=guard_triggered,
        post_rotation_boxes=post_rotation_boxes,
        post_rotation_size=post_rotation_size,
    )


def augment_detection(
    record: DocumentRecord, config: DetectionAugConfig, seed: int
) -> AugmentationResult:
    """
    Pipeline d'augmentation de la piste tampons / signatures.

    Rotation (pas de garde de marge, boîtes restreintes à l'image), gigue,
    puis bruit multiplicatif par canal.

    Args:
        record: Document dactylographié
        config: Configuration de la piste
        seed: Graine maître

    Returns:
        Document augmenté et trace

    Raises:
        UnsupportedDocumentError: Si le document est manuscrit
    """
    if record.handwritten:
        raise UnsupportedDocumentError(f"Document manuscrit: {record.id}")

    image = np.asarray(record.image.pixels)
    boxes = record.boxes()
    trace: list[AppliedOp] = []

    rng = make_rng(seed, record.id, 0)
    angle: float | None = None
    if config.max_rotation_deg > 0 and rng.random() < config.rotation_probability:
        angle = float(rng.uniform(-config.max_rotation_deg, config.max_rotation_deg))
        result = rotate_with_boxes(
            image,
            boxes,
            angle,
            config.rotation_interpolation,
            max_angle_deg=config.max_rotation_deg,
        )
        image, boxes = result.image, result.boxes
        trace.append(AppliedOp("rotate", {"angle": angle}))
    post_rotation_boxes = tuple(boxes)
    post_rotation_size = (int(image.shape[1]), int(image.shape[0]))

    rng = make_rng(seed, record.id, 1)
    if rng.random() < config.jitter.probability:
        params = resolve_photometric_params(
            PhotometricKind.COLOR_JITTER, _jitter_params(config.jitter), rng
        )
        image = apply_photometric(image, PhotometricKind.COLOR_JITTER, params)
        trace.append(AppliedOp("color_jitter", params))

    rng = make_rng(seed, record.id, 2)
    if rng.random() < config.noise_probability:
        params = resolve_photometric_params(
            PhotometricKind.MULTIPLICATIVE_NOISE,
            {"range": config.noise_multiplier_range},
            rng,
        )
        image = apply_photometric(image, PhotometricKind.MULTIPLICATIVE_NOISE, params)
        trace.append(AppliedOp("multiplicative_noise", params))

    return AugmentationResult(
        record=_rebuild(record, image, boxes),
        trace=tuple(trace),
        rotation_angle=angle,
        post_rotation_boxes=post_rotation_boxes,
        post_rotation_size=post_rotation_size,
    )


class AugmentationService:
    """
    Service d'augmentation d'un manifeste complet.

    Attributes:
        keyword_config: Configuration de la piste mots-clés
        detection_config: Configuration de la piste détection
        jobs: Nombre de workers
    """

    def __init__(
        self,
        keyword_config: KeywordAugConfig | None = None,
        detection_config: DetectionAugConfig | None = None,
        jobs: int = 1,
    ):
        self.keyword_config = keyword_config or KeywordAugConfig()
        self.detection_config = detection_config or DetectionAugConfig()
        self.jobs = max(1, jobs)

    def augment_record(
        self, record: DocumentRecord, track: Literal["keyword", "detection"], seed: int
    ) -> AugmentationResult:
        """Augmente un document selon la piste demandée."""
        if track == "keyword":
            return augment_keyword(record, self.keyword_config, seed)
        if track == "detection":
            return augment_detection(record, self.detection_config, seed)
        raise InvalidParamsError(f"Piste inconnue: {track}")

    def augment_manifest(
        self,
        manifest: DatasetManifest,
        track: Literal["keyword", "detection"],
        seed: int,
    ) -> list[AugmentationResult]:
        """
        Augmente tous les documents dactylographiés d'un manifeste.

        Les documents manuscrits sont ignorés. L'ordre de sortie suit
        l'ordre du manifeste, quel que soit le nombre de workers.

        Args:
            manifest: Manifeste source
            track: "keyword" ou "detection"
            seed: Graine maître

        Returns:
            Résultats dans l'ordre du manifeste
        """
        records = [r for r in manifest if not r.handwritten]
        skipped = len(manifest) - len(records)
        if skipped:
            logger.info("%d document(s) manuscrit(s) ignoré(s)", skipped)
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(lambda r: self.augment_record(r, track, seed), records))
