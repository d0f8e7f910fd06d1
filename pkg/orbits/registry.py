"""Registry of recurrence function kinds."""

import logging
from typing import Any, Callable, Dict, List, Optional, Type

from .base import OrbitFunction
from .functions import DigitSquareSum, MaxPlusC, PhiSum
from exceptions import InputError

logger = logging.getLogger(__name__)


class OrbitFunctionRegistry:
    """Maps kind names to OrbitFunction classes and builds instances on demand."""

    def __init__(self):
        self._kinds: Dict[str, Type[OrbitFunction]] = {}

    def register(self, name: str, function_class: Type[OrbitFunction]) -> None:
        """
        Register a function kind.

        Args:
            name: Unique kind name as used in OrbitSpec.kind
            function_class: OrbitFunction subclass
        """
        self._kinds[name] = function_class
        logger.debug(f"Registered orbit function kind: {name}")

    def get(self, name: str) -> Optional[Type[OrbitFunction]]:
        return self._kinds.get(name)

    def names(self) -> List[str]:
        return sorted(self._kinds)

    def build(self, name: str, totient: Optional[Callable[[int], int]] = None) -> OrbitFunction:
        """
        Instantiate a kind, wiring in the totient provider where one is used.

        Raises:
            InputError: If the kind is not registered
        """
        function_class = self.get(name)
        if function_class is None:
            raise InputError(f"Unknown function kind {name!r}; known kinds: {', '.join(self.names())}")
        if function_class is PhiSum:
            return PhiSum(totient)
        return function_class()

    def list_available(self) -> List[Dict[str, Any]]:
        """Kinds with their known properties."""
        return [
            {"name": name, "properties": self.build(name).properties}
            for name in self.names()
        ]


# Global registry instance
registry = OrbitFunctionRegistry()
registry.register("phi-sum", PhiSum)
registry.register("digit-square-sum", DigitSquareSum)
registry.register("max-plus-c", MaxPlusC)
