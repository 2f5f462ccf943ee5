"""Repository de base avec interface commune."""

from abc import ABC, abstractmethod
from collections.abc import Iterable
from typing import Generic, TypeVar

T = TypeVar("T")


class BaseRepository(ABC, Generic[T]):
    """
    Classe de base abstraite pour tous les repositories.

    Définit l'interface commune d'accès aux entités persistées sur disque
    (documents d'un manifeste, rapports de validation), indexées par
    identifiant de document.

    Type:
        T: Type de l'entité gérée par le repository
    """

    @abstractmethod
    def find_all(self) -> list[T]:
        """
        Récupère toutes les entités, triées par identifiant.

        Returns:
            Liste des entités
        """

    @abstractmethod
    def find_by_id(self, item_id: str) -> T | None:
        """
        Récupère une entité par identifiant de document.

        Args:
            item_id: Identifiant du document

        Returns:
            L'entité ou None si elle n'existe pas
        """

    @abstractmethod
    def save(self, item: T) -> T:
        """
        Persiste une entité (remplace la précédente de même identifiant).

        Args:
            item: Entité à persister

        Returns:
            L'entité persistée
        """

    @abstractmethod
    def delete(self, item_id: str) -> bool:
        """
        Supprime une entité.

        Args:
            item_id: Identifiant du document

        Returns:
            True si supprimée, False si absente
        """

    def save_all(self, items: Iterable[T]) -> list[T]:
        """Persiste plusieurs entités dans l'ordre donné."""
        return [self.save(item) for item in items]

    def exists(self, item_id: str) -> bool:
        return self.find_by_id(item_id) is not None
