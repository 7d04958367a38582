from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Sequence


class OutputInterface(ABC):
    """Base interface for result writers."""

    @abstractmethod
    def write_table(self, columns: Sequence[str], rows: List[Sequence[float]], summary: Optional[Dict[str, Any]] = None) -> str:
        """Write columnar results.

        Args:
            columns: Column names in order.
            rows: One sequence of numbers per row.
            summary: Optional trailing summary object.

        Returns:
            The text that was written.
        """
        pass

    @abstractmethod
    def write_document(self, document: Dict[str, Any]) -> str:
        """Write a single structured document.

        Returns:
            The text that was written.
        """
        pass
