"""Repositories pour l'accès aux données."""

from .base import BaseRepository
from .manifest_repository import ManifestRepository
from .report_repository import ReportRepository

__all__ = [
    "BaseRepository",
    "ManifestRepository",
    "ReportRepository",
]
