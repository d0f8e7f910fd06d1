"""Recurrence functions, their registry, and the cycle-detecting orbit engine."""

from .base import OrbitFunction
from .engine import (
    Guards, OrbitResult, OrbitSpec, Termination,
    detect_cycle, detect_cycle_naive, iterate_terms, step,
)
from .registry import registry

# Export key items
__all__ = [
    "OrbitFunction", "Guards", "OrbitResult", "OrbitSpec", "Termination",
    "detect_cycle", "detect_cycle_naive", "iterate_terms", "step", "registry",
]
