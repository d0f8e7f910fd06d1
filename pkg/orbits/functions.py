"""Concrete recurrence functions: shifted totient sums and the comparison kinds."""

import logging
from typing import Any, Callable, Dict, Optional, Sequence

from .base import OrbitFunction
from totient import phi

logger = logging.getLogger(__name__)


class PhiSum(OrbitFunction):
    """f(n_1, ..., n_d) = phi(n_1) + ... + phi(n_d) + k."""

    def __init__(self, totient: Optional[Callable[[int], int]] = None):
        self._totient = totient or phi

    def evaluate(self, window: Sequence[int], k: int) -> int:
        totient = self._totient
        return sum(totient(x) for x in window) + k

    @property
    def name(self) -> str:
        return "phi-sum"

    @property
    def properties(self) -> Dict[str, Any]:
        return {
            "bounded_for": "d=1 any k; d=2 even k",
            "satisfies_decreasing": False,
        }


def digit_square_sum(n: int, base: int = 10) -> int:
    """Sum of the squares of the digits of n in the given base."""
    total = 0
    while n:
        n, digit = divmod(n, base)
        total += digit * digit
    return total


class DigitSquareSum(OrbitFunction):
    """f(n_1, ..., n_d) = sum of squared base-10 digits over the window, plus k."""

    def __init__(self, base: int = 10):
        self.base = base

    def evaluate(self, window: Sequence[int], k: int) -> int:
        return sum(digit_square_sum(x, self.base) for x in window) + k

    @property
    def name(self) -> str:
        return "digit-square-sum"

    @property
    def properties(self) -> Dict[str, Any]:
        return {
            "bounded_for": "all d and k",
            "satisfies_decreasing": True,
            "base": self.base,
        }


class MaxPlusC(OrbitFunction):
    """f(n_1, ..., n_d) = max(n_1, ..., n_d) + k; periodic only when k = 0."""

    def evaluate(self, window: Sequence[int], k: int) -> int:
        return max(window) + k

    @property
    def name(self) -> str:
        return "max-plus-c"

    @property
    def properties(self) -> Dict[str, Any]:
        return {
            "bounded_for": "k=0 only",
            "satisfies_decreasing": False,
        }
