"""Base interface for recurrence functions f: N^d -> N."""

from abc import ABC, abstractmethod
from typing import Any, Dict, Sequence


class OrbitFunction(ABC):
    """Abstract base class for the right-hand side of x_{n+d} = f(x_n, ..., x_{n+d-1})."""

    @abstractmethod
    def evaluate(self, window: Sequence[int], k: int) -> int:
        """
        Compute the next term from the last d terms.

        Args:
            window: The d most recent terms, oldest first
            k: Shift added by the shifted families (0 for the plain ones)

        Returns:
            The next term, a positive integer
        """
        pass

    @property
    @abstractmethod
    def name(self) -> str:
        """Registry name of the function kind."""
        pass

    @property
    @abstractmethod
    def properties(self) -> Dict[str, Any]:
        """
        What is known about orbits of this kind.

        Example:
            {
                'bounded_for': 'd=1 any k; d=2 even k',
                'satisfies_decreasing': False,
            }
        """
        pass

