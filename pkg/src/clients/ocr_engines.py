"""Adaptateurs des moteurs OCR derrière une interface commune."""

import logging
from abc import ABC, abstractmethod
from enum import StrEnum
from pathlib import Path
from typing import Literal

from ..exceptions import OcrError
from ..models.document import DocumentImage
from ..models.ocr import OcrToken
from .ocr_parsers import parse_cloud_read_response, parse_local_engine_output

logger = logging.getLogger(__name__)


class Capability(StrEnum):
    LOCAL = "local"
    REMOTE = "remote"


class OcrEngine(ABC):
    """
    Interface d'un moteur OCR.

    Les tokens renvoyés sont toujours restreints aux limites de l'image.
    """

    capability: Capability = Capability.LOCAL

    @abstractmethod
    def analyze(self, image: DocumentImage, document_id: str | None = None) -> list[OcrToken]:
        """
        Reconnaît les mots d'une image.

        Args:
            image: Image du document
            document_id: Identifiant du document (utilisé par les rejeux)

        Returns:
            Tokens OCR, restreints à l'image
        """


class RecordedOcrEngine(OcrEngine):
    """
    Rejoue des sorties OCR enregistrées.

    Le fichier <directory>/<document_id>.tsv (format Tesseract) ou
    <directory>/<document_id>.json (format Azure Read) est relu tel quel.

    Attributes:
        directory: Dossier des sorties enregistrées
        fmt: "tesseract" ou "azure"
    """

    def __init__(self, directory: str | Path, fmt: Literal["tesseract", "azure"] = "tesseract"):
        self.directory = Path(directory)
        self.fmt = fmt
        self.capability = Capability.LOCAL if fmt == "tesseract" else Capability.REMOTE

    def path_for(self, document_id: str) -> Path:
        suffix = ".tsv" if self.fmt == "tesseract" else ".json"
        return self.directory / f"{document_id}{suffix}"

    def analyze(self, image: DocumentImage, document_id: str | None = None) -> list[OcrToken]:
        if document_id is None:
            raise OcrError("Un identifiant de document est requis pour rejouer une sortie OCR")
        path = self.path_for(document_id)
        try:
            raw = path.read_bytes()
        except OSError as e:
            raise OcrError(f"Sortie OCR enregistrée introuvable: {path}") from e

        size = (image.width, image.height)
        if self.fmt == "tesseract":
            return parse_local_engine_output(raw, image_size=size)
        return parse_cloud_read_response(raw, image_size=size)


class TesseractEngine(OcrEngine):
    """Moteur local Tesseract (nécessite pytesseract et le binaire tesseract)."""

    capability = Capability.LOCAL

    def __init__(self, lang: str = "eng", config: str = ""):
        try:
            import pytesseract
        except ImportError as e:
            raise OcrError("pytesseract non installé (extra 'tesseract')") from e
        self._pytesseract = pytesseract
        self.lang = lang
        self.config = config

    def analyze(self, image: DocumentImage, document_id: str | None = None) -> list[OcrToken]:
        from PIL import Image

        pil = Image.fromarray(image.pixels)
        tsv = self._pytesseract.image_to_data(pil, lang=self.lang, config=self.config)
        tokens = parse_local_engine_output(tsv, image_size=(image.width, image.height))
        logger.debug("Tesseract: %d token(s) pour %s", len(tokens), document_id)
        return tokens
