"""
Génération de factures synthétiques.

Chaque page rendue contient des lignes de texte (titre, client, date,
total et montant), un tampon (ellipse) et une signature (polyligne), avec
des annotations exactes, une sortie OCR au format Tesseract et un plan
décrivant le contenu attendu de chaque document.
"""

import json
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from ..models.bounding_box import BBox
from ..models.document import (
    ANNOTATION_CLASSES,
    Annotation,
    DatasetManifest,
    DocumentImage,
    DocumentRecord,
    FieldClass,
    Split,
)
from ..models.report import Verdict
from ..repositories.manifest_repository import ManifestRepository
from .augmentation_service import PhotometricKind, apply_photometric, rotate_with_boxes
from .seeding import make_rng

logger = logging.getLogger(__name__)

PAGE_WIDTH = 600
PAGE_HEIGHT = 800
ANNOTATION_PAD = 2
LINE_SLOTS = tuple(range(130, 500, 36))

TITLES = ("INVOICE", "FACTURE", "Invoice", "TAX INVOICE")
CLIENTS = ("Acme Corp", "Globex SARL", "Initech Ltd", "Umbrella SA", "Stark Industries")
FILLERS = (
    "Payment due within thirty days",
    "Bank transfer reference attached",
    "Thank you for your business",
    "VAT included where applicable",
    "Delivery address on file",
    "Order number 4471 dispatched",
)
TSV_HEADER = "level\tpage_num\tblock_num\tpar_num\tline_num\tword_num\tleft\ttop\twidth\theight\tconf\ttext"


@dataclass(frozen=True)
class FixtureOptions:
    """
    Options du plan de génération.

    Attributes:
        omit: Classes à omettre, par rang de document
        handwritten: Rangs des documents marqués manuscrits
        skew: Angle d'inclinaison en degrés, par rang de document
        blur: Rangs des documents floutés (flou médian 3 px)
        split: Partition du manifeste produit
    """

    omit: Mapping[int, frozenset[FieldClass]] = field(default_factory=dict)
    handwritten: frozenset[int] = frozenset()
    skew: Mapping[int, float] = field(default_factory=dict)
    blur: frozenset[int] = frozenset()
    split: Split = Split.TEST


@dataclass(frozen=True)
class PlannedDocument:
    """Contenu déclaré d'un document généré."""

    id: str
    classes: tuple[FieldClass, ...]
    handwritten: bool
    skew: float
    blur: bool

    @property
    def expected_verdict(self) -> Verdict:
        if self.handwritten:
            return Verdict.UNSUPPORTED
        if set(ANNOTATION_CLASSES) <= set(self.classes):
            return Verdict.VALID
        return Verdict.INVALID

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "classes": [c.value for c in self.classes],
            "handwritten": self.handwritten,
            "skew": self.skew,
            "blur": self.blur,
            "expected_verdict": self.expected_verdict.value,
        }


@dataclass(frozen=True)
class FixturePlan:
    """Plan auto-descriptif d'un jeu synthétique."""

    seed: int
    documents: tuple[PlannedDocument, ...]

    def class_counts(self) -> dict[FieldClass, int]:
        """Nombre d'annotations attendues par classe."""
        counts = {c: 0 for c in ANNOTATION_CLASSES}
        for doc in self.documents:
            for cls in doc.classes:
                counts[cls] += 1
        return counts

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "documents": [d.to_dict() for d in self.documents],
            "class_counts": {c.value: n for c, n in self.class_counts().items()},
        }


@dataclass(frozen=True)
class FixtureResult:
    manifest: DatasetManifest
    plan: FixturePlan
    manifest_path: Path | None = None
    ocr_dir: Path | None = None


@dataclass
class _Word:
    text: str
    box: BBox
    conf: int


@dataclass
class _Page:
    image: Image.Image
    words: list[_Word] = field(default_factory=list)
    annotations: list[Annotation] = field(default_factory=list)


def _font() -> ImageFont.ImageFont | ImageFont.FreeTypeFont:
    return ImageFont.load_default()


def _draw_words(
    page: _Page, draw: ImageDraw.ImageDraw, x: float, y: float, text: str, rng: np.random.Generator
) -> list[BBox]:
    font = _font()
    boxes = []
    for word in text.split():
        left, top, right, bottom = draw.textbbox((x, y), word, font=font)
        draw.text((x, y), word, fill=(20, 20, 20), font=font)
        box = BBox(math.floor(left), math.floor(top), math.ceil(right), math.ceil(bottom))
        page.words.append(_Word(word, box, int(rng.integers(90, 100))))
        boxes.append(box)
        space = draw.textlength(" ", font=font)
        x = right + max(space, 4)
    return boxes


def _annotate(page: _Page, cls: FieldClass, boxes: list[BBox], text: str) -> None:
    union = boxes[0]
    for box in boxes[1:]:
        union = union.union(box)
    padded = BBox(
        max(union.x_min - ANNOTATION_PAD, 0),
        max(union.y_min - ANNOTATION_PAD, 0),
        min(union.x_max + ANNOTATION_PAD, PAGE_WIDTH),
        min(union.y_max + ANNOTATION_PAD, PAGE_HEIGHT),
    )
    page.annotations.append(Annotation(cls, padded, text))


def _render(doc_id: str, seed: int, omit: frozenset[FieldClass]) -> _Page:
    rng = make_rng(seed, doc_id, 0)
    page = _Page(Image.new("RGB", (PAGE_WIDTH, PAGE_HEIGHT), (255, 255, 255)))
    draw = ImageDraw.Draw(page.image)

    if FieldClass.TITLE not in omit:
        title = str(rng.choice(TITLES))
        boxes = _draw_words(page, draw, int(rng.integers(40, 240)), int(rng.integers(30, 70)), title, rng)
        _annotate(page, FieldClass.TITLE, boxes, title)

    slots = list(rng.permutation(LINE_SLOTS))
    x0 = int(rng.integers(40, 120))

    y = int(slots.pop())
    if FieldClass.CLIENT not in omit:
        label = _draw_words(page, draw, x0, y, "Client:", rng)
        name = str(rng.choice(CLIENTS))
        boxes = _draw_words(page, draw, label[-1].x_max + 8, y, name, rng)
        _annotate(page, FieldClass.CLIENT, boxes, name)

    y = int(slots.pop())
    if FieldClass.DATE not in omit:
        label = _draw_words(page, draw, x0, y, "Date:", rng)
        date = f"{int(rng.integers(1, 29)):02d}/{int(rng.integers(1, 13)):02d}/20{int(rng.integers(19, 25))}"
        boxes = _draw_words(page, draw, label[-1].x_max + 8, y, date, rng)
        _annotate(page, FieldClass.DATE, boxes, date)

    y = int(slots.pop())
    x_total = int(rng.integers(300, 380))
    if FieldClass.TOTAL not in omit:
        boxes = _draw_words(page, draw, x_total, y, "Total", rng)
        _annotate(page, FieldClass.TOTAL, boxes, "Total")
    if FieldClass.TOTAL_VALUE not in omit:
        value = f"{int(rng.integers(10, 9999))}.{int(rng.integers(0, 100)):02d}"
        boxes = _draw_words(page, draw, x_total + 70, y, value, rng)
        _annotate(page, FieldClass.TOTAL_VALUE, boxes, value)

    for _ in range(int(rng.integers(2, 5))):
        if not slots:
            break
        _draw_words(page, draw, x0, int(slots.pop()), str(rng.choice(FILLERS)), rng)

    if FieldClass.STAMP not in omit:
        cx, cy = int(rng.integers(400, 500)), int(rng.integers(580, 660))
        rx, ry = int(rng.integers(45, 65)), int(rng.integers(30, 45))
        draw.ellipse((cx - rx, cy - ry, cx + rx, cy + ry), outline=(30, 60, 200), width=3)
        page.annotations.append(
            Annotation(FieldClass.STAMP, BBox(cx - rx - 1, cy - ry - 1, cx + rx + 2, cy + ry + 2))
        )

    if FieldClass.SIGNATURE not in omit:
        x, y_sig = float(rng.integers(70, 160)), float(rng.integers(620, 700))
        points = [(x, y_sig)]
        for _ in range(12):
            x += float(rng.uniform(6, 14))
            y_sig = float(np.clip(y_sig + rng.uniform(-12, 12), 580, 760))
            points.append((x, y_sig))
        draw.line(points, fill=(10, 10, 60), width=2, joint="curve")
        xs, ys = [p[0] for p in points], [p[1] for p in points]
        page.annotations.append(
            Annotation(
                FieldClass.SIGNATURE,
                BBox(math.floor(min(xs)) - 2, math.floor(min(ys)) - 2, math.ceil(max(xs)) + 2, math.ceil(max(ys)) + 2),
            )
        )
    return page


def _tsv(words: list[_Word]) -> str:
    lines = [TSV_HEADER, f"1\t1\t0\t0\t0\t0\t0\t0\t{PAGE_WIDTH}\t{PAGE_HEIGHT}\t-1\t"]
    for n, word in enumerate(words, start=1):
        b = word.box
        left, top = math.floor(b.x_min), math.floor(b.y_min)
        width, height = math.ceil(b.x_max) - left, math.ceil(b.y_max) - top
        lines.append(f"5\t1\t1\t1\t1\t{n}\t{left}\t{top}\t{width}\t{height}\t{word.conf}\t{word.text}")
    return "\n".join(lines) + "\n"


def _skew(page: _Page, angle: float) -> tuple[np.ndarray, list[Annotation], list[_Word]]:
    pixels = np.asarray(page.image)
    boxes = [a.box for a in page.annotations] + [w.box for w in page.words]
    result = rotate_with_boxes(pixels, boxes, angle, "cubic")
    n = len(page.annotations)
    annotations = [a.with_box(b) for a, b in zip(page.annotations, result.boxes[:n])]
    words = [_Word(w.text, b, w.conf) for w, b in zip(page.words, result.boxes[n:])]
    return result.image, annotations, words


def synth_fixture(
    seed: int,
    n_docs: int,
    out_dir: str | Path | None = None,
    options: FixtureOptions | None = None,
) -> FixtureResult:
    """
    Génère un jeu de factures synthétiques déterministe.

    Si out_dir est fourni, écrit images/<id>.png, ocr/<id>.tsv,
    manifest.json et plan.json.

    Args:
        seed: Graine maître
        n_docs: Nombre de documents (≥ 0)
        out_dir: Dossier de sortie (None : rien n'est écrit)
        options: Plan (omissions, manuscrits, inclinaison, flou)

    Returns:
        Manifeste, plan et chemins écrits
    """
    if n_docs < 0:
        raise ValueError(f"n_docs doit être ≥ 0: {n_docs}")
    options = options or FixtureOptions()

    records, planned, dumps = [], [], {}
    for index in range(n_docs):
        doc_id = f"doc-{index:04d}"
        omit = frozenset(options.omit.get(index, frozenset()))
        page = _render(doc_id, seed, omit)

        angle = float(options.skew.get(index, 0.0))
        if angle:
            pixels, annotations, words = _skew(page, angle)
        else:
            pixels, annotations, words = np.asarray(page.image), page.annotations, page.words
        if index in options.blur:
            pixels = apply_photometric(pixels, PhotometricKind.MEDIAN_BLUR, {"kernel": 3})

        records.append(
            DocumentRecord(
                id=doc_id,
                image=DocumentImage(pixels),
                annotations=tuple(annotations),
                handwritten=index in options.handwritten,
                image_path=f"images/{doc_id}.png",
            )
        )
        planned.append(
            PlannedDocument(
                id=doc_id,
                classes=tuple(a.field_class for a in annotations),
                handwritten=index in options.handwritten,
                skew=angle,
                blur=index in options.blur,
            )
        )
        dumps[doc_id] = _tsv(words)

    manifest = DatasetManifest(options.split, tuple(records))
    plan = FixturePlan(seed, tuple(planned))
    if out_dir is None:
        return FixtureResult(manifest, plan)

    out = Path(out_dir)
    manifest_path = ManifestRepository(out / "manifest.json").write(manifest)
    ocr_dir = out / "ocr"
    ocr_dir.mkdir(parents=True, exist_ok=True)
    for doc_id, dump in dumps.items():
        (ocr_dir / f"{doc_id}.tsv").write_text(dump, encoding="utf-8")
    (out / "plan.json").write_text(
        json.dumps(plan.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    logger.info("%d document(s) synthétique(s) écrits dans %s", n_docs, out)
    return FixtureResult(manifest, plan, manifest_path, ocr_dir)
