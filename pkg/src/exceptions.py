"""
Exceptions de l'application.

Toutes les erreurs métier dérivent de InvoiceValidationError, avec une
famille par module (manifeste, augmentation, OCR, backends, métriques,
fonctions de perte, configuration).
"""


class InvoiceValidationError(Exception):
    """Erreur de base du moteur de validation de factures."""


# ==================== MANIFESTE ====================


class InvalidBoxError(InvoiceValidationError, ValueError):
    """Boîte englobante invalide (inversée, vide, non finie ou négative)."""


class InvalidDocumentIdError(InvoiceValidationError, ValueError):
    """Identifiant de document inutilisable comme nom de fichier."""


class ManifestError(InvoiceValidationError):
    """
    Erreur de lecture d'un manifeste.

    Attributes:
        path: Chemin du champ fautif (ex: "records[2].annotations[0].box")
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class MalformedManifestError(ManifestError):
    """Le document ne respecte pas le schéma JSON du manifeste."""


class UnknownClassError(ManifestError):
    """Nom de classe absent de FieldClass."""


class BoxOutOfBoundsError(ManifestError):
    """Boîte d'annotation hors des limites de l'image."""


class InvertedBoxError(BoxOutOfBoundsError):
    """Boîte dont les coins sont inversés ou d'aire nulle."""


# ==================== AUGMENTATION ====================


class AugmentationError(InvoiceValidationError):
    """Erreur d'augmentation de données."""


class InvalidAngleError(AugmentationError, ValueError):
    """Angle de rotation hors de la borne configurée."""


class InvalidParamsError(AugmentationError, ValueError):
    """Paramètres d'opération invalides."""


class UnsupportedDocumentError(AugmentationError):
    """Document manuscrit, non pris en charge par les pipelines."""


# ==================== OCR ====================


class OcrError(InvoiceValidationError):
    """Erreur liée à un moteur OCR."""


class MalformedRowError(OcrError):
    """
    Ligne TSV mal formée.

    Attributes:
        line: Numéro de ligne (1 = en-tête)
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"ligne {line}: {message}" if line else message)


class MalformedResponseError(OcrError):
    """Réponse JSON du service OCR distant mal formée."""


class EmptyAnalysisError(OcrError):
    """Le service OCR distant n'a produit aucune page analysée."""


class OcrServiceError(OcrError):
    """Échec d'appel au service OCR distant."""


class OcrEngineError(OcrError):
    """Échec inattendu d'un moteur OCR local ou distant."""


# ==================== ÉTIQUETAGE ====================


class EmptyDocumentError(InvoiceValidationError):
    """Aucun token à encoder pour le document."""


# ==================== BACKENDS ====================


class BackendError(InvoiceValidationError):
    """Erreur liée à un backend d'inférence."""


class BackendFailureError(BackendError):
    """Échec d'une prédiction d'un backend."""


class BackendConfigError(BackendError):
    """Descripteur de backend inconnu ou modèle introuvable."""


# ==================== MÉTRIQUES ====================


class MetricsError(InvoiceValidationError):
    """Erreur de calcul de métrique."""


class LengthMismatchError(MetricsError, ValueError):
    """Séquences d'étiquettes de longueurs différentes."""


class ZeroGoldError(MetricsError):
    """AP indéfinie : aucune vérité terrain pour la classe."""


# ==================== PERTES ====================


class LossError(InvoiceValidationError, ValueError):
    """Erreur de calcul de fonction de perte."""


class IndexOutOfRangeError(LossError, IndexError):
    """Classe cible hors du vecteur de logits."""


class LocationOutsideBoxError(LossError):
    """Point hors de (ou sur le bord de) la boîte de référence."""


# ==================== CONFIGURATION ====================


class ConfigurationError(InvoiceValidationError):
    """Configuration invalide (clé inconnue, valeur hors bornes, backend inconnu)."""
