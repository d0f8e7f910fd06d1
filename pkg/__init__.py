"""phi-orbits - verification toolkit for shifted Euler-totient recurrences."""

__version__ = "0.1.0"

__all__ = ["__version__"]
