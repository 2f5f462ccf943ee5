"""Export des hyperparamètres d'entraînement pour un harnais externe."""

import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict

from ..exceptions import ConfigurationError

Track = Literal["layout", "detection"]


class _Export(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class LayoutTrainingConfig(_Export):
    """Piste mots-clés : ajustement du modèle de mise en page."""

    track: Literal["layout"] = "layout"
    model: str = "LayoutLMv3"
    epochs: int = 50
    batch_size: int = 4
    optimizer: str = "Adam"
    weight_decay: float = 1e-3
    learning_rate: float = 5e-5
    loss: str = "focal"
    focal_gamma: float = 2.0
    early_stopping_patience: int | None = None


class DetectionTrainingConfig(_Export):
    """Piste tampons / signatures : ajustement du détecteur."""

    track: Literal["detection"] = "detection"
    model: str = "RetinaNet"
    epochs: int = 50
    batch_size: int = 8
    optimizer: str = "SGD"
    momentum: float = 0.9
    weight_decay: float = 5e-4
    learning_rate: float = 1e-3
    early_stopping_patience: int | None = None


TRACKS: dict[str, type[_Export]] = {
    "layout": LayoutTrainingConfig,
    "detection": DetectionTrainingConfig,
}


def export_training_config(track: str) -> dict[str, Any]:
    """
    Hyperparamètres publiés d'une piste.

    Args:
        track: "layout" ou "detection"

    Returns:
        Dictionnaire JSON

    Raises:
        ConfigurationError: Piste inconnue
    """
    try:
        model = TRACKS[track]
    except KeyError as e:
        raise ConfigurationError(
            f"Piste inconnue: {track!r} (attendu: {', '.join(TRACKS)})"
        ) from e
    return model().model_dump(mode="json")


def write_training_config(track: str, path: str | Path) -> Path:
    """Écrit l'export d'une piste dans un fichier JSON."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(
        json.dumps(export_training_config(track), indent=2) + "\n", encoding="utf-8"
    )
    return target
