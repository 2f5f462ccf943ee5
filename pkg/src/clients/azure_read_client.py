"""Client pour l'API Azure Read v3.2."""

import io
import logging
import threading
import time
from typing import Any

import requests
from PIL import Image

from ..config import OcrClientConfig
from ..exceptions import EmptyAnalysisError, OcrServiceError
from ..models.document import DocumentImage
from ..models.ocr import OcrToken
from .ocr_engines import Capability, OcrEngine
from .ocr_parsers import parse_cloud_read_response

logger = logging.getLogger(__name__)

ANALYZE_PATH = "/vision/v3.2/read/analyze"
KEY_HEADER = "Ocp-Apim-Subscription-Key"


class AzureReadClient(OcrEngine):
    """
    Client pour le service OCR distant Azure Read.

    Ce client soumet l'image, interroge l'opération jusqu'à son terme et
    gère les tentatives de nouvelle connexion. Le nombre de requêtes
    simultanées est borné par config.max_in_flight.

    Attributes:
        config: Configuration du client (endpoint et clé depuis l'environnement)
    """

    capability = Capability.REMOTE

    def __init__(self, config: OcrClientConfig | None = None):
        """
        Initialise le client.

        Args:
            config: Configuration personnalisée (défaut: OcrClientConfig.from_env())

        Raises:
            OcrServiceError: Si l'endpoint ou la clé manquent
        """
        self.config = config or OcrClientConfig.from_env()
        if not self.config.endpoint or not self.config.key:
            raise OcrServiceError("OCR_ENDPOINT et OCR_KEY doivent être définis")
        self._slots = threading.BoundedSemaphore(self.config.max_in_flight)
        self._session = requests.Session()
        self._session.headers[KEY_HEADER] = self.config.key

    @property
    def analyze_url(self) -> str:
        return self.config.endpoint.rstrip("/") + ANALYZE_PATH

    def _with_retries(self, method: str, url: str, **kwargs: Any) -> requests.Response:
        for attempt in range(self.config.max_retries):
            try:
                response = self._session.request(
                    method, url, timeout=self.config.timeout, **kwargs
                )
                response.raise_for_status()
                return response

            except requests.exceptions.RequestException as e:
                if attempt < self.config.max_retries - 1:
                    wait_time = self.config.retry_delay * (2**attempt)
                    logger.warning(
                        "Tentative %d échouée. Nouvelle tentative dans %ss...",
                        attempt + 1,
                        wait_time,
                    )
                    time.sleep(wait_time)
                else:
                    logger.error(
                        "Erreur après %d tentatives : %s", self.config.max_retries, e
                    )
                    raise
        raise OcrServiceError("Aucune tentative effectuée")

    def submit(self, image_bytes: bytes) -> str:
        """
        Soumet une image à l'analyse.

        Returns:
            URL de l'opération (en-tête Operation-Location)
        """
        response = self._with_retries(
            "POST",
            self.analyze_url,
            data=image_bytes,
            headers={"Content-Type": "application/octet-stream"},
        )
        location = response.headers.get("Operation-Location")
        if not location:
            raise OcrServiceError("En-tête Operation-Location absent")
        return location

    def poll(self, operation_url: str) -> dict[str, Any]:
        """
        Interroge l'opération jusqu'à "succeeded" ou "failed".

        Returns:
            Le JSON final de l'opération

        Raises:
            EmptyAnalysisError: Si l'analyse a échoué
            OcrServiceError: Si l'analyse ne termine pas dans max_polls
        """
        for _ in range(self.config.max_polls):
            payload = self._with_retries("GET", operation_url).json()
            status = str(payload.get("status", "")).lower()
            if status == "succeeded":
                return payload
            if status == "failed":
                raise EmptyAnalysisError("L'analyse distante a échoué")
            time.sleep(self.config.poll_interval)
        raise OcrServiceError(f"Analyse non terminée après {self.config.max_polls} interrogations")

    def read(self, image: DocumentImage) -> dict[str, Any]:
        """Analyse complète (soumission + interrogation), JSON brut."""
        buffer = io.BytesIO()
        Image.fromarray(image.pixels).save(buffer, format="PNG")
        with self._slots:
            location = self.submit(buffer.getvalue())
            return self.poll(location)

    def analyze(self, image: DocumentImage, document_id: str | None = None) -> list[OcrToken]:
        payload = self.read(image)
        return parse_cloud_read_response(payload, image_size=(image.width, image.height))
