"""
Lecture des sorties brutes des moteurs OCR.

- moteur local : TSV de Tesseract (image_to_data), une ligne par élément ;
- moteur distant : JSON du résultat Azure Read v3.2.
"""

import csv
import io
import json
import logging
import math
from typing import Any

import pandas as pd

from ..exceptions import EmptyAnalysisError, InvalidBoxError, MalformedResponseError, MalformedRowError
from ..models.bounding_box import BBox, envelope
from ..models.ocr import OcrToken

logger = logging.getLogger(__name__)

TSV_COLUMNS = (
    "level",
    "page_num",
    "block_num",
    "par_num",
    "line_num",
    "word_num",
    "left",
    "top",
    "width",
    "height",
    "conf",
    "text",
)
WORD_LEVEL = 5


def _clip(box: BBox, image_size: tuple[int, int] | None) -> BBox | None:
    if image_size is None:
        return box
    return box.clip(*image_size)


def _read_tsv(data: bytes | str) -> tuple[pd.DataFrame, list[int]]:
    """Lit le TSV ; renvoie aussi le numéro de ligne du fichier de chaque rangée."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    numbered = [(n, line) for n, line in enumerate(text.split("\n"), start=1) if line.strip("\r")]
    if not numbered or not text.strip():
        raise MalformedRowError("Sortie TSV vide (en-tête manquant)", line=1)
    header_line = numbered[0][0]
    try:
        frame = pd.read_csv(
            io.StringIO("\n".join(line for _, line in numbered)),
            sep="\t",
            dtype=str,
            keep_default_na=False,
            quoting=csv.QUOTE_NONE,
            skip_blank_lines=False,
        )
    except pd.errors.ParserError as e:
        raise MalformedRowError(f"TSV illisible: {e}") from e

    missing = [c for c in TSV_COLUMNS if c not in frame.columns]
    if missing:
        raise MalformedRowError(f"Colonnes manquantes: {', '.join(missing)}", line=header_line)
    return frame, [n for n, _ in numbered[1:]]


def parse_local_engine_output(
    data: bytes | str, image_size: tuple[int, int] | None = None
) -> list[OcrToken]:
    """
    Parse la sortie TSV du moteur local (Tesseract).

    Seules les lignes de niveau mot (level = 5) de confiance ≥ 0 et de
    texte non vide produisent un token ; les lignes structurelles
    (conf = -1) sont ignorées.

    Args:
        data: Contenu TSV avec en-tête
        image_size: (largeur, hauteur) pour restreindre les boîtes à l'image

    Returns:
        Tokens dans l'ordre du fichier

    Raises:
        MalformedRowError: Ligne mal formée (numéro de ligne, en-tête = 1)

    Exemple:
        >>> rows = "level\\tpage_num\\tblock_num\\tpar_num\\tline_num\\tword_num\\t"
        >>> rows += "left\\ttop\\twidth\\theight\\tconf\\ttext\\n"
        >>> rows += "5\\t1\\t1\\t1\\t1\\t1\\t10\\t20\\t30\\t10\\t96\\tTOTAL\\n"
        >>> parse_local_engine_output(rows)[0].box.to_list()
        [10.0, 20.0, 40.0, 30.0]
    """
    frame, lines = _read_tsv(data)
    tokens: list[OcrToken] = []

    for line, row in zip(lines, frame.itertuples(index=False)):
        try:
            level = int(row.level)
            conf = float(row.conf)
        except ValueError as e:
            raise MalformedRowError(f"Valeur numérique invalide: {e}", line=line) from e

        text = str(row.text).strip()
        if level != WORD_LEVEL or conf < 0 or not text:
            continue

        try:
            left, top = float(row.left), float(row.top)
            width, height = float(row.width), float(row.height)
        except ValueError as e:
            raise MalformedRowError(f"Géométrie invalide: {e}", line=line) from e
        if conf > 100:
            raise MalformedRowError(f"Confiance hors de [0, 100]: {conf}", line=line)

        try:
            box = BBox(left, top, left + width, top + height)
        except InvalidBoxError as e:
            raise MalformedRowError(str(e), line=line) from e

        clipped = _clip(box, image_size)
        if clipped is None:
            logger.debug("Token hors image ignoré (ligne %d)", line)
            continue
        tokens.append(OcrToken(text, clipped, conf / 100.0))

    return tokens


def format_local_engine_output(tokens: list[OcrToken]) -> str:
    """
    Écrit des tokens au format TSV du moteur local.

    Les boîtes sont arrondies vers l'extérieur au pixel entier ; la
    sortie est relisible par parse_local_engine_output.
    """
    rows = []
    for n, token in enumerate(tokens, start=1):
        left, top = math.floor(token.box.x_min), math.floor(token.box.y_min)
        rows.append(
            {
                "level": WORD_LEVEL,
                "page_num": 1,
                "block_num": 1,
                "par_num": 1,
                "line_num": 1,
                "word_num": n,
                "left": left,
                "top": top,
                "width": math.ceil(token.box.x_max) - left,
                "height": math.ceil(token.box.y_max) - top,
                "conf": round(token.confidence * 100),
                "text": token.text,
            }
        )
    frame = pd.DataFrame(rows, columns=list(TSV_COLUMNS))
    return frame.to_csv(sep="\t", index=False, quoting=csv.QUOTE_NONE, lineterminator="\n")


def _require(mapping: Any, key: str, where: str) -> Any:
    if not isinstance(mapping, dict) or key not in mapping:
        raise MalformedResponseError(f"Champ '{key}' manquant dans {where}")
    return mapping[key]


def parse_cloud_read_response(
    data: bytes | str | dict[str, Any], image_size: tuple[int, int] | None = None
) -> list[OcrToken]:
    """
    Parse un résultat Azure Read v3.2.

    Chaque mot (analyzeResult.readResults[].lines[].words[]) devient un
    token ; son polygone à 8 coordonnées est remplacé par son enveloppe.

    Args:
        data: JSON brut ou déjà décodé
        image_size: (largeur, hauteur) pour restreindre les boîtes à l'image

    Returns:
        Tokens dans l'ordre de la réponse

    Raises:
        MalformedResponseError: JSON invalide ou schéma non respecté
        EmptyAnalysisError: Analyse échouée ou sans page
    """
    if isinstance(data, dict):
        payload = data
    else:
        try:
            payload = json.loads(data)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise MalformedResponseError(f"JSON invalide: {e}") from e

    status = payload.get("status") if isinstance(payload, dict) else None
    if isinstance(status, str) and status.lower() == "failed":
        raise EmptyAnalysisError("L'analyse distante a échoué")

    analyze = _require(payload, "analyzeResult", "la réponse")
    pages = _require(analyze, "readResults", "analyzeResult")
    if not isinstance(pages, list) or not pages:
        raise EmptyAnalysisError("Aucune page analysée")

    tokens: list[OcrToken] = []
    for p, page in enumerate(pages):
        for l, line in enumerate(_require(page, "lines", f"readResults[{p}]")):
            for w, word in enumerate(_require(line, "words", f"lines[{l}]")):
                where = f"readResults[{p}].lines[{l}].words[{w}]"
                polygon = _require(word, "boundingBox", where)
                text = str(_require(word, "text", where)).strip()
                if not isinstance(polygon, list) or len(polygon) != 8:
                    raise MalformedResponseError(f"{where}: polygone à 8 coordonnées attendu")
                try:
                    points = [(float(polygon[i]), float(polygon[i + 1])) for i in range(0, 8, 2)]
                    box = BBox(*(max(c, 0.0) for c in envelope(points)))
                    confidence = float(word.get("confidence", 1.0))
                except (TypeError, ValueError) as e:
                    raise MalformedResponseError(f"{where}: {e}") from e
                if not text:
                    continue
                clipped = _clip(box, image_size)
                if clipped is None:
                    continue
                tokens.append(OcrToken(text, clipped, min(max(confidence, 0.0), 1.0)))
    return tokens
