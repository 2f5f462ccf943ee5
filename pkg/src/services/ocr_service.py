"""Service OCR : moteur → restriction à l'image → ordre de lecture."""

import logging
from dataclasses import dataclass
from pathlib import Path

from ..clients.azure_read_client import AzureReadClient
from ..clients.ocr_engines import OcrEngine, RecordedOcrEngine, TesseractEngine
from ..config import OcrClientConfig, OcrConfig
from ..exceptions import ConfigurationError, InvoiceValidationError, OcrEngineError
from ..models.document import DocumentRecord
from ..models.ocr import OcrToken
from .text_metrics import sort_reading_order, text_similarity, word_accuracy

logger = logging.getLogger(__name__)


def build_engine(config: OcrConfig, default_dir: str | Path | None = None) -> OcrEngine:
    """
    Construit le moteur OCR décrit par la configuration.

    Args:
        config: Sélection du moteur
        default_dir: Dossier des sorties enregistrées si config.recorded_dir est vide

    Returns:
        Le moteur

    Raises:
        ConfigurationError: Moteur rejoué sans dossier
    """
    if config.engine.startswith("recorded-"):
        directory = config.recorded_dir or default_dir
        if directory is None:
            raise ConfigurationError("ocr.recorded_dir est requis pour un moteur rejoué")
        fmt = "tesseract" if config.engine == "recorded-tesseract" else "azure"
        return RecordedOcrEngine(directory, fmt)
    if config.engine == "tesseract":
        return TesseractEngine()
    return AzureReadClient(OcrClientConfig.from_env(max_in_flight=config.max_in_flight))


@dataclass(frozen=True)
class OcrComparison:
    """Exactitude et similarité d'un moteur par rapport à une référence."""

    accuracy: float
    similarity: float
    documents: int

    def to_dict(self) -> dict[str, float | int]:
        return {
            "accuracy": round(self.accuracy * 100, 2),
            "similarity": round(self.similarity * 100, 2),
            "documents": self.documents,
        }


class OcrService:
    """
    Service d'extraction des tokens d'un document.

    Attributes:
        engine: Moteur OCR utilisé
    """

    def __init__(self, engine: OcrEngine):
        self.engine = engine

    def extract(self, record: DocumentRecord) -> list[OcrToken]:
        """
        Extrait les tokens d'un document dans l'ordre de lecture.

        Args:
            record: Document à analyser

        Returns:
            Tokens restreints à l'image, ordonnés

        Raises:
            OcrEngineError: Erreur du moteur hors de la hiérarchie du projet
        """
        try:
            tokens = self.engine.analyze(record.image, document_id=record.id)
        except (InvoiceValidationError, OSError):
            raise
        except Exception as e:
            raise OcrEngineError(f"{record.id}: {type(e).__name__}: {e}") from e
        width, height = record.image.width, record.image.height
        inside = []
        for token in tokens:
            box = token.box.clip(width, height)
            if box is not None:
                inside.append(token if box == token.box else OcrToken(token.text, box, token.confidence))
        logger.debug("%s: %d token(s)", record.id, len(inside))
        return sort_reading_order(inside)

    @staticmethod
    def compare(
        predicted: dict[str, list[OcrToken]], reference: dict[str, list[OcrToken]]
    ) -> OcrComparison:
        """
        Compare deux jeux de sorties OCR document par document.

        Les métriques sont moyennées sur les documents présents dans la
        référence (un document absent des prédictions compte comme vide).

        Args:
            predicted: Tokens par identifiant de document
            reference: Tokens de référence par identifiant de document

        Returns:
            Exactitude et similarité moyennes
        """
        if not reference:
            return OcrComparison(1.0, 1.0, 0)
        accuracies, similarities = [], []
        for doc_id in sorted(reference):
            ref = reference[doc_id]
            pred = predicted.get(doc_id, [])
            accuracies.append(word_accuracy(pred, ref))
            similarities.append(text_similarity(pred, ref))
        n = len(reference)
        return OcrComparison(sum(accuracies) / n, sum(similarities) / n, n)
