"""Modèles pour les documents, annotations et manifestes."""

import hashlib
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any

import numpy as np
from PIL import Image

from ..exceptions import InvalidDocumentIdError, InvoiceValidationError
from .bounding_box import BBox


class FieldClass(StrEnum):
    """
    Classes de champs d'une facture.

    L'ordre de déclaration fixe l'indice de classe des backends
    (Other en dernier). Other n'apparaît jamais dans les annotations,
    seulement dans l'étiquetage des tokens.
    """

    TITLE = "Title"
    CLIENT = "Client"
    STAMP = "Stamp"
    SIGNATURE = "Signature"
    DATE = "Date"
    TOTAL = "Total"
    TOTAL_VALUE = "TotalValue"
    OTHER = "Other"

    @property
    def index(self) -> int:
        """Indice de la classe dans les vecteurs de scores."""
        return CLASS_ORDER.index(self)

    @classmethod
    def from_index(cls, index: int) -> "FieldClass":
        return CLASS_ORDER[index]


CLASS_ORDER: tuple[FieldClass, ...] = tuple(FieldClass)
NUM_CLASSES = len(CLASS_ORDER)

# Champs textuels (piste mots-clés) et objets (piste détection)
KEYWORD_CLASSES: tuple[FieldClass, ...] = (
    FieldClass.TITLE,
    FieldClass.CLIENT,
    FieldClass.DATE,
    FieldClass.TOTAL,
    FieldClass.TOTAL_VALUE,
)
OBJECT_CLASSES: tuple[FieldClass, ...] = (FieldClass.STAMP, FieldClass.SIGNATURE)
ANNOTATION_CLASSES: tuple[FieldClass, ...] = tuple(
    c for c in CLASS_ORDER if c is not FieldClass.OTHER
)


def check_document_id(document_id: str) -> str:
    """
    Vérifie qu'un identifiant peut nommer un fichier de sortie.

    Raises:
        InvalidDocumentIdError: Identifiant vide, "." ou "..", ou contenant un séparateur de chemin
    """
    if document_id in ("", ".", "..") or any(sep in document_id for sep in ("/", "\\", "\0")):
        raise InvalidDocumentIdError(f"Identifiant de document invalide: {document_id!r}")
    return document_id


class Split(StrEnum):
    """Partitions d'un jeu de données."""

    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


@dataclass(frozen=True)
class Annotation:
    """
    Annotation de vérité terrain sur une image.

    Attributes:
        field_class: Classe annotée (jamais Other)
        box: Boîte en pixels
        text: Transcription de référence optionnelle
    """

    field_class: FieldClass
    box: BBox
    text: str | None = None

    def __post_init__(self) -> None:
        if self.field_class is FieldClass.OTHER:
            raise InvoiceValidationError("La classe Other n'est pas annotable")

    def with_box(self, box: BBox) -> "Annotation":
        return Annotation(self.field_class, box, self.text)

    def to_dict(self) -> dict[str, Any]:
        return {
            "class": self.field_class.value,
            "box": self.box.to_list(),
            "text": self.text,
        }


@dataclass(frozen=True, eq=False)
class DocumentImage:
    """
    Image RGB 8 bits d'un document.

    Le tableau de pixels (hauteur, largeur, 3) est en lecture seule.

    Attributes:
        pixels: Tableau numpy uint8 de forme (height, width, 3)
    """

    pixels: np.ndarray

    CHANNELS = 3

    def __post_init__(self) -> None:
        array = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if array.ndim != 3 or array.shape[2] != self.CHANNELS:
            raise InvoiceValidationError(
                f"Image RGB attendue (H, W, 3), reçu {array.shape}"
            )
        if array.shape[0] == 0 or array.shape[1] == 0:
            raise InvoiceValidationError("Image vide")
        if array is self.pixels:
            array = array.copy()
        array.setflags(write=False)
        object.__setattr__(self, "pixels", array)

    @classmethod
    def from_file(cls, path: str | Path) -> "DocumentImage":
        """
        Charge une image PNG ou JPEG en RGB 8 bits.

        Args:
            path: Chemin du fichier

        Returns:
            L'image chargée
        """
        with Image.open(path) as img:
            return cls(np.asarray(img.convert("RGB")))

    @classmethod
    def blank(cls, width: int, height: int, value: int = 255) -> "DocumentImage":
        """Image uniforme (blanche par défaut)."""
        return cls(np.full((height, width, cls.CHANNELS), value, dtype=np.uint8))

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def channels(self) -> int:
        return self.CHANNELS

    def to_bytes(self) -> bytes:
        """Tampon brut, ligne par ligne (longueur = largeur × hauteur × 3)."""
        return self.pixels.tobytes()

    def fingerprint(self) -> str:
        """Empreinte SHA-256 des dimensions et des pixels."""
        digest = hashlib.sha256(f"{self.width}x{self.height}:".encode())
        digest.update(self.to_bytes())
        return digest.hexdigest()

    def save(self, path: str | Path) -> None:
        """Enregistre l'image (format déduit de l'extension)."""
        Image.fromarray(np.asarray(self.pixels)).save(path)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DocumentImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"DocumentImage({self.width}x{self.height})"


@dataclass(frozen=True)
class DocumentRecord:
    """
    Unité de travail du pipeline : une image de facture et ses annotations.

    Attributes:
        id: Identifiant opaque, unique dans un manifeste
        image: Image du document
        annotations: Annotations de vérité terrain
        handwritten: True si le document est manuscrit
        image_path: Chemin relatif de l'image dans le manifeste
    """

    id: str
    image: DocumentImage
    annotations: tuple[Annotation, ...] = ()
    handwritten: bool = False
    image_path: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "annotations", tuple(self.annotations))

    def boxes(self) -> list[BBox]:
        return [a.box for a in self.annotations]

    def classes(self) -> set[FieldClass]:
        return {a.field_class for a in self.annotations}

    def replace(
        self,
        image: DocumentImage | None = None,
        annotations: Iterable[Annotation] | None = None,
        image_path: str | None = None,
    ) -> "DocumentRecord":
        """Copie du document avec une nouvelle image et/ou de nouvelles annotations."""
        return DocumentRecord(
            id=self.id,
            image=image if image is not None else self.image,
            annotations=tuple(annotations) if annotations is not None else self.annotations,
            handwritten=self.handwritten,
            image_path=image_path if image_path is not None else self.image_path,
        )

    def __repr__(self) -> str:
        return (
            f"DocumentRecord(id={self.id}, image={self.image!r}, "
            f"annotations={len(self.annotations)}, handwritten={self.handwritten})"
        )


@dataclass(frozen=True)
class DatasetManifest:
    """
    Manifeste d'une partition du jeu de données.

    Attributes:
        split: Partition (train, validation, test)
        records: Documents de la partition
    """

    split: Split
    records: tuple[DocumentRecord, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "split", Split(self.split))
        object.__setattr__(self, "records", tuple(self.records))
        ids = [r.id for r in self.records]
        if len(ids) != len(set(ids)):
            raise InvoiceValidationError("Identifiants de documents dupliqués")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[DocumentRecord]:
        return iter(self.records)

    def find(self, record_id: str) -> DocumentRecord | None:
        """Retrouve un document par identifiant."""
        return next((r for r in self.records if r.id == record_id), None)

    def concat(self, other: "DatasetManifest") -> "DatasetManifest":
        """Concatène deux manifestes de même partition."""
        return DatasetManifest(self.split, self.records + other.records)

    def annotation_count(self) -> int:
        return sum(len(r.annotations) for r in self.records)
