"""
Configuration de l'application.

Ce module définit les paramètres de configuration du pipeline de
validation de factures : augmentation, OCR, backends, post-traitement des
détections, étiquetage et critères de validité. Les clés inconnues sont
rejetées.
"""

import hashlib
import json
import os
from pathlib import Path
from typing import Any, Literal

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_serializer,
    field_validator,
    model_validator,
)

from .exceptions import ConfigurationError
from .models.document import FieldClass

MAX_SEED = 2**64 - 1
RUNTIME_FIELDS = frozenset({"jobs", "output_dir"})


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# ==================== AUGMENTATION ====================


class ColorJitterConfig(_StrictModel):
    """Gigue photométrique : facteurs uniformes et décalage de teinte."""

    probability: float = Field(0.5, ge=0.0, le=1.0)
    brightness: tuple[float, float] = (0.8, 1.2)
    contrast: tuple[float, float] = (0.8, 1.2)
    saturation: tuple[float, float] = (0.8, 1.2)
    hue: float = Field(0.05, ge=0.0, le=0.5)

    @field_validator("brightness", "contrast", "saturation")
    @classmethod
    def _check_range(cls, value: tuple[float, float]) -> tuple[float, float]:
        low, high = value
        if not (0.0 <= low <= high):
            raise ValueError(f"Intervalle de facteurs invalide: {value}")
        return value


class KeywordAugConfig(_StrictModel):
    """
    Augmentation de la piste mots-clés.

    Ordre : padding → flou médian / gigue → rotation (garde de marge)
    → redimensionnement bilinéaire.
    """

    median_blur_kernel: int = Field(3, ge=1)
    blur_probability: float = Field(0.5, ge=0.0, le=1.0)
    jitter: ColorJitterConfig = ColorJitterConfig()
    pad_probability: float = Field(1.0, ge=0.0, le=1.0)
    pad_ratio: float = Field(0.05, ge=0.0, le=1.0)
    rotation_probability: float = Field(1.0, ge=0.0, le=1.0)
    max_rotation_deg: float = Field(5.0, ge=0.0, le=180.0)
    rotation_interpolation: Literal["cubic", "linear", "nearest"] = "cubic"
    crop_margin_px: float = Field(20.0, ge=0.0)
    resize_target: tuple[int, int] | None = None

    @field_validator("median_blur_kernel")
    @classmethod
    def _odd_kernel(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError("La taille du noyau de flou médian doit être impaire")
        return value

    @field_validator("resize_target")
    @classmethod
    def _positive_target(cls, value: tuple[int, int] | None) -> tuple[int, int] | None:
        if value is not None and min(value) <= 0:
            raise ValueError("Dimensions de redimensionnement positives attendues")
        return value


class DetectionAugConfig(_StrictModel):
    """Augmentation de la piste tampons / signatures."""

    rotation_probability: float = Field(0.5, ge=0.0, le=1.0)
    max_rotation_deg: float = Field(10.0, ge=0.0, le=180.0)
    rotation_interpolation: Literal["cubic", "linear", "nearest"] = "cubic"
    jitter: ColorJitterConfig = ColorJitterConfig(probability=0.4)
    noise_probability: float = Field(0.3, ge=0.0, le=1.0)
    noise_multiplier_range: tuple[float, float] = (0.5, 1.0)

    @field_validator("noise_multiplier_range")
    @classmethod
    def _check_noise(cls, value: tuple[float, float]) -> tuple[float, float]:
        low, high = value
        if not (0.5 <= low <= high <= 1.0):
            raise ValueError("Le multiplicateur de bruit doit être dans [0.5, 1.0]")
        return value


# ==================== OCR ====================


class OcrClientConfig(_StrictModel):
    """Configuration du client OCR distant (Azure Read v3.2)."""

    endpoint: str | None = None
    key: str | None = None
    timeout: int = 30
    max_retries: int = Field(3, ge=1)
    retry_delay: float = Field(1.0, ge=0.0)
    poll_interval: float = Field(1.0, ge=0.0)
    max_polls: int = Field(60, ge=1)
    max_in_flight: int = Field(4, ge=1)

    @classmethod
    def from_env(cls, **overrides: Any) -> "OcrClientConfig":
        """Lit OCR_ENDPOINT et OCR_KEY dans l'environnement."""
        return cls(
            endpoint=os.environ.get("OCR_ENDPOINT"),
            key=os.environ.get("OCR_KEY"),
            **overrides,
        )


class OcrConfig(_StrictModel):
    """
    Sélection du moteur OCR.

    Les moteurs "recorded-*" rejouent des sorties enregistrées
    (<recorded_dir>/<id>.tsv ou .json) ; "tesseract" et "azure" appellent
    les moteurs réels.
    """

    engine: Literal["recorded-tesseract", "recorded-azure", "tesseract", "azure"] = (
        "recorded-tesseract"
    )
    recorded_dir: str | None = None
    max_in_flight: int = Field(4, ge=1)


# ==================== INFÉRENCE ====================


def _check_descriptor(value: str) -> str:
    if value == "mock":
        return value
    if value.startswith("onnx:") and len(value) > len("onnx:"):
        return value
    raise ValueError(f"Descripteur de backend inconnu: {value!r} (attendu mock|onnx:<chemin>)")


class BackendConfig(_StrictModel):
    """Descripteurs des backends : "mock" ou "onnx:<chemin>"."""

    layout: str = "mock"
    detector: str = "mock"
    tokenizer: str | None = None

    @field_validator("layout", "detector")
    @classmethod
    def _known_descriptor(cls, value: str) -> str:
        return _check_descriptor(value)


class DetectionPostprocessConfig(_StrictModel):
    """Seuils de post-traitement des détections."""

    score_threshold: float = Field(0.5, ge=0.0, le=1.0)
    nms_iou_threshold: float = Field(0.5, ge=0.0, le=1.0)


class LabelingConfig(_StrictModel):
    """Alignement tokens / annotations et fenêtrage des séquences."""

    overlap_threshold: float = Field(0.5, ge=0.0, le=1.0)
    max_sequence_length: int = Field(512, ge=1)
    stride: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _stride_below_length(self) -> "LabelingConfig":
        if self.stride >= self.max_sequence_length:
            raise ValueError("stride doit être inférieur à max_sequence_length")
        return self


# ==================== VALIDATION ====================


DEFAULT_REQUIRED_FIELDS = frozenset(
    {
        FieldClass.TITLE,
        FieldClass.CLIENT,
        FieldClass.DATE,
        FieldClass.TOTAL,
        FieldClass.TOTAL_VALUE,
    }
)


class ValidationCriteria(_StrictModel):
    """
    Critères de validité d'une facture.

    Par défaut : les cinq champs textuels, un tampon et une signature.
    """

    required_fields: frozenset[FieldClass] = DEFAULT_REQUIRED_FIELDS
    require_stamp: bool = True
    require_signature: bool = True
    min_detection_score: float = Field(0.5, ge=0.0, le=1.0)
    min_field_confidence: float = Field(0.5, ge=0.0, le=1.0)

    @field_validator("required_fields")
    @classmethod
    def _no_other(cls, value: frozenset[FieldClass]) -> frozenset[FieldClass]:
        if FieldClass.OTHER in value:
            raise ValueError("Other ne peut pas être un champ requis")
        return value

    @field_serializer("required_fields")
    def _ordered_fields(self, value: frozenset[FieldClass]) -> list[str]:
        return [c.value for c in FieldClass if c in value]

    def snapshot(self) -> dict[str, Any]:
        """Copie JSON stable des critères (champs dans l'ordre des classes)."""
        return self.model_dump(mode="json")


# ==================== PIPELINE ====================


class PipelineConfig(_StrictModel):
    """Configuration complète du pipeline."""

    keyword_augmentation: KeywordAugConfig = KeywordAugConfig()
    detection_augmentation: DetectionAugConfig = DetectionAugConfig()
    ocr: OcrConfig = OcrConfig()
    backends: BackendConfig = BackendConfig()
    detection: DetectionPostprocessConfig = DetectionPostprocessConfig()
    labeling: LabelingConfig = LabelingConfig()
    criteria: ValidationCriteria = ValidationCriteria()
    seed: int = Field(0, ge=0, le=MAX_SEED)
    output_dir: str = "out"
    jobs: int | None = Field(None, ge=1)

    def fingerprint(self) -> str:
        """
        Empreinte SHA-256 de la configuration.

        Les réglages d'exécution (jobs, output_dir) sont exclus : ils ne
        changent pas les résultats.

        Returns:
            Condensat hexadécimal du JSON canonique (clés triées)
        """
        canonical = json.dumps(
            self.model_dump(mode="json", exclude=set(RUNTIME_FIELDS)),
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_overrides(
        self,
        seed: int | None = None,
        layout_backend: str | None = None,
        detector_backend: str | None = None,
        output_dir: str | None = None,
        jobs: int | None = None,
    ) -> "PipelineConfig":
        """
        Applique les options de ligne de commande (prioritaires sur le fichier).

        Raises:
            ConfigurationError: Si une valeur surchargée est invalide
        """
        data = self.model_dump(mode="json")
        if seed is not None:
            data["seed"] = seed
        if layout_backend is not None:
            data["backends"]["layout"] = layout_backend
        if detector_backend is not None:
            data["backends"]["detector"] = detector_backend
        if output_dir is not None:
            data["output_dir"] = output_dir
        if jobs is not None:
            data["jobs"] = jobs
        return parse_config(data)


def _format_errors(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]) or "<racine>"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


def parse_config(data: dict[str, Any]) -> PipelineConfig:
    """
    Valide un dictionnaire de configuration.

    Args:
        data: Configuration décodée

    Returns:
        La configuration validée

    Raises:
        ConfigurationError: Clé inconnue ou valeur invalide
    """
    try:
        return PipelineConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(_format_errors(e)) from e


def load_config(path: str | Path | None) -> PipelineConfig:
    """
    Charge la configuration depuis un fichier JSON.

    Args:
        path: Chemin du fichier (None : configuration par défaut)

    Returns:
        La configuration validée

    Raises:
        ConfigurationError: Fichier illisible, JSON invalide ou schéma violé
    """
    if path is None:
        return DEFAULT_CONFIG
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"Configuration illisible {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError("La configuration doit être un objet JSON")
    return parse_config(data)


# Configuration par défaut
DEFAULT_CONFIG = PipelineConfig()
