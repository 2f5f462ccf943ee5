"""Repository pour les rapports de validation d'un run."""

import json
import logging
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from ..models.document import check_document_id
from ..models.report import ValidationReport
from .base import BaseRepository

logger = logging.getLogger(__name__)

REPORTS_DIR = "reports"
RUN_FILE = "run.json"
SUMMARY_FILE = "summary.json"


def write_json(path: Path, payload: dict[str, Any]) -> Path:
    """Écrit un objet JSON strict (ni NaN ni Infinity), clés triées."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    return path


class ReportRepository(BaseRepository[ValidationReport]):
    """
    Repository des rapports d'un dossier de sortie.

    Disposition : <out>/reports/<id>.json, <out>/run.json, <out>/summary.json.

    Attributes:
        out_dir: Dossier de sortie du run
    """

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)

    @property
    def reports_dir(self) -> Path:
        return self.out_dir / REPORTS_DIR

    def path_for(self, document_id: str) -> Path:
        """
        Chemin du rapport d'un document, toujours dans reports/.

        Raises:
            InvalidDocumentIdError: Identifiant contenant un séparateur de chemin
        """
        return self.reports_dir / f"{check_document_id(document_id)}.json"

    def find_all(self) -> list[ValidationReport]:
        if not self.reports_dir.is_dir():
            return []
        reports = []
        for path in sorted(self.reports_dir.glob("*.json")):
            report = self._read(path)
            if report is not None:
                reports.append(report)
        return sorted(reports, key=lambda r: r.document_id)

    def find_by_id(self, item_id: str) -> ValidationReport | None:
        path = self.path_for(item_id)
        return self._read(path) if path.is_file() else None

    def save(self, item: ValidationReport) -> ValidationReport:
        path = self.path_for(item.document_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(item.to_json() + "\n", encoding="utf-8")
        return item

    def delete(self, item_id: str) -> bool:
        path = self.path_for(item_id)
        if not path.is_file():
            return False
        path.unlink()
        return True

    def write_run(self, run: dict[str, Any]) -> Path:
        """Écrit le manifeste de run (empreinte, graine, versions, durées)."""
        return write_json(self.out_dir / RUN_FILE, run)

    def write_summary(self, summary: dict[str, Any]) -> Path:
        """Écrit la synthèse des verdicts."""
        return write_json(self.out_dir / SUMMARY_FILE, summary)

    @staticmethod
    def _read(path: Path) -> ValidationReport | None:
        try:
            return ValidationReport.from_json(path.read_bytes())
        except ValidationError as e:
            logger.warning("Rapport illisible ignoré %s: %s", path, e)
            return None
