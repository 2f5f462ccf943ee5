"""
InvoiceValidator - Validation automatique de factures numérisées.

Extraction OCR, classification des champs (titre, client, date, total,
montant), détection des tampons et signatures, puis décision de validité.
"""

__version__ = "0.1.0"
__author__ = "Developer"
