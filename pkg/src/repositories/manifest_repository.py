"""
Repository pour les manifestes de jeux de données.

Format JSON d'un manifeste (un fichier par partition, chemins d'images
relatifs au dossier du manifeste) :

    {"split": "train|validation|test",
     "records": [{"id": str, "image": chemin, "handwritten": bool,
                  "annotations": [{"class": str, "box": [x_min, y_min, x_max, y_max],
                                   "text": str | null}]}]}
"""

import json
import logging
from collections.abc import Callable
from pathlib import Path
from typing import Annotated

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..exceptions import (
    BoxOutOfBoundsError,
    InvalidBoxError,
    InvalidDocumentIdError,
    InvertedBoxError,
    MalformedManifestError,
    UnknownClassError,
)
from ..models.bounding_box import BBox
from ..models.document import (
    ANNOTATION_CLASSES,
    Annotation,
    DatasetManifest,
    DocumentImage,
    DocumentRecord,
    FieldClass,
    Split,
    check_document_id,
)
from .base import BaseRepository

logger = logging.getLogger(__name__)

ImageLoader = Callable[[Path], DocumentImage]


# ==================== SCHÉMA ====================


class _Wire(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False, populate_by_name=True)


class AnnotationWire(_Wire):
    field_class: str = Field(alias="class")
    box: Annotated[list[float], Field(min_length=4, max_length=4)]
    text: str | None = None


class RecordWire(_Wire):
    id: Annotated[str, Field(min_length=1)]
    image: Annotated[str, Field(min_length=1)]
    handwritten: bool = False
    annotations: list[AnnotationWire] = []


class ManifestWire(_Wire):
    split: Split
    records: list[RecordWire] = []


def _location(loc: tuple) -> str:
    path = ""
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else str(part))
    return path or "<racine>"


# ==================== LECTURE / ÉCRITURE ====================


def _to_annotation(
    wire: AnnotationWire, image: DocumentImage, path: str
) -> Annotation:
    try:
        field_class = FieldClass(wire.field_class)
    except ValueError as e:
        raise UnknownClassError(f"Classe inconnue: {wire.field_class!r}", f"{path}.class") from e
    if field_class not in ANNOTATION_CLASSES:
        raise UnknownClassError("La classe Other n'est pas annotable", f"{path}.class")

    x_min, y_min, x_max, y_max = wire.box
    if not (x_min < x_max and y_min < y_max):
        raise InvertedBoxError(f"Boîte inversée ou vide: {wire.box}", f"{path}.box")
    try:
        box = BBox(x_min, y_min, x_max, y_max)
    except InvalidBoxError as e:
        raise BoxOutOfBoundsError(str(e), f"{path}.box") from e
    if not box.is_inside(image.width, image.height):
        raise BoxOutOfBoundsError(
            f"Boîte {wire.box} hors de l'image {image.width}x{image.height}", f"{path}.box"
        )
    return Annotation(field_class, box, wire.text)


def parse_manifest(
    data: bytes | str,
    base_dir: str | Path = ".",
    image_loader: ImageLoader | None = None,
) -> DatasetManifest:
    """
    Parse et valide un manifeste.

    Chaque image référencée est chargée ; le premier champ fautif est
    désigné par son chemin (ex: "records[2].annotations[0].box").

    Args:
        data: Contenu JSON du manifeste
        base_dir: Dossier de résolution des chemins d'images
        image_loader: Chargeur d'images (défaut : DocumentImage.from_file)

    Returns:
        Le manifeste validé

    Raises:
        MalformedManifestError: Schéma non respecté, image introuvable, identifiant dupliqué
        UnknownClassError: Classe absente de FieldClass (ou Other)
        BoxOutOfBoundsError: Boîte hors de l'image (InvertedBoxError si inversée)
    """
    loader = image_loader or DocumentImage.from_file
    base = Path(base_dir)
    try:
        wire = ManifestWire.model_validate_json(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise MalformedManifestError(first["msg"], _location(first["loc"])) from e

    seen: set[str] = set()
    records = []
    for i, rec in enumerate(wire.records):
        path = f"records[{i}]"
        try:
            check_document_id(rec.id)
        except InvalidDocumentIdError as e:
            raise MalformedManifestError(str(e), f"{path}.id") from e
        if rec.id in seen:
            raise MalformedManifestError(f"Identifiant dupliqué: {rec.id}", f"{path}.id")
        seen.add(rec.id)

        image_path = base / rec.image
        try:
            image = loader(image_path)
        except (OSError, ValueError) as e:
            raise MalformedManifestError(
                f"Image illisible ou introuvable: {image_path}", f"{path}.image"
            ) from e

        annotations = [
            _to_annotation(ann, image, f"{path}.annotations[{j}]")
            for j, ann in enumerate(rec.annotations)
        ]
        records.append(
            DocumentRecord(
                id=rec.id,
                image=image,
                annotations=tuple(annotations),
                handwritten=rec.handwritten,
                image_path=rec.image,
            )
        )
    logger.debug("Manifeste %s : %d document(s)", wire.split.value, len(records))
    return DatasetManifest(wire.split, tuple(records))


def default_image_path(record: DocumentRecord) -> str:
    return record.image_path or f"images/{record.id}.png"


def serialize_manifest(manifest: DatasetManifest) -> bytes:
    """
    Sérialise un manifeste (les images ne sont pas écrites).

    Args:
        manifest: Manifeste à sérialiser

    Returns:
        JSON UTF-8, indenté, clés dans l'ordre du schéma
    """
    payload = {
        "split": manifest.split.value,
        "records": [
            {
                "id": record.id,
                "image": default_image_path(record),
                "handwritten": record.handwritten,
                "annotations": [a.to_dict() for a in record.annotations],
            }
            for record in manifest
        ],
    }
    return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


class ManifestRepository(BaseRepository[DocumentRecord]):
    """
    Repository pour un manifeste sur disque et ses images.

    Attributes:
        path: Chemin du fichier manifeste
        split: Partition utilisée à la création d'un manifeste vide
    """

    def __init__(self, path: str | Path, split: Split = Split.TEST):
        """
        Initialise le repository.

        Args:
            path: Chemin du manifeste (créé à la première écriture)
            split: Partition d'un nouveau manifeste
        """
        self.path = Path(path)
        self.split = Split(split)
        self._records: dict[str, DocumentRecord] | None = None

    @property
    def base_dir(self) -> Path:
        return self.path.parent

    def load(self) -> DatasetManifest:
        """
        Charge le manifeste depuis le disque.

        Raises:
            MalformedManifestError: Fichier illisible ou invalide
        """
        try:
            data = self.path.read_bytes()
        except OSError as e:
            raise MalformedManifestError(f"Manifeste illisible: {self.path}") from e
        manifest = parse_manifest(data, self.base_dir)
        self.split = manifest.split
        self._records = {r.id: r for r in manifest}
        return manifest

    def write(self, manifest: DatasetManifest) -> Path:
        """
        Écrit le manifeste et toutes ses images.

        Returns:
            Chemin du manifeste écrit
        """
        self.split = manifest.split
        self._records = {}
        for record in manifest:
            self._records[record.id] = self._write_image(record)
        self._flush()
        return self.path

    def find_all(self) -> list[DocumentRecord]:
        return [self._cache()[k] for k in sorted(self._cache())]

    def find_by_id(self, item_id: str) -> DocumentRecord | None:
        return self._cache().get(item_id)

    def save(self, item: DocumentRecord) -> DocumentRecord:
        """
        Ajoute ou remplace un document, écrit son image et le manifeste.

        Args:
            item: Document à persister

        Returns:
            Le document, avec son chemin d'image
        """
        stored = self._write_image(item)
        self._cache()[item.id] = stored
        self._flush()
        return stored

    def delete(self, item_id: str) -> bool:
        """Retire un document du manifeste (l'image reste sur disque)."""
        if self._cache().pop(item_id, None) is None:
            return False
        self._flush()
        return True

    def to_manifest(self) -> DatasetManifest:
        return DatasetManifest(self.split, tuple(self._cache().values()))

    # ==================== MÉTHODES PRIVÉES ====================

    def _cache(self) -> dict[str, DocumentRecord]:
        if self._records is None:
            if self.path.exists():
                self.load()
            else:
                self._records = {}
        return self._records

    def _write_image(self, record: DocumentRecord) -> DocumentRecord:
        relative = default_image_path(record)
        target = self.base_dir / relative
        target.parent.mkdir(parents=True, exist_ok=True)
        record.image.save(target)
        return record if record.image_path == relative else record.replace(image_path=relative)

    def _flush(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_bytes(serialize_manifest(self.to_manifest()))
