"""Flux aléatoires déterministes par document et par opération."""

import hashlib

import numpy as np

from ..config import MAX_SEED


def derive_seed(master: int, document_id: str, op_index: int) -> int:
    """
    Dérive une graine 64 bits stable de (graine maître, document, opération).

    Le résultat ne dépend ni de l'ordre d'exécution ni du processus
    (pas de hash() Python, qui est randomisé).

    Args:
        master: Graine maître dans [0, 2**64 - 1]
        document_id: Identifiant du document
        op_index: Rang de l'opération dans le pipeline

    Returns:
        Graine dérivée dans [0, 2**64 - 1]
    """
    if not 0 <= master <= MAX_SEED:
        raise ValueError(f"Graine hors de [0, 2**64 - 1]: {master}")
    digest = hashlib.blake2b(
        f"{master}:{document_id}:{op_index}".encode("utf-8"), digest_size=8
    )
    return int.from_bytes(digest.digest(), "big")


def make_rng(master: int, document_id: str, op_index: int) -> np.random.Generator:
    """Générateur numpy dédié à une opération d'un document."""
    return np.random.default_rng(derive_seed(master, document_id, op_index))
