"""Custom exceptions for phi-orbits."""


class PhiOrbitsError(Exception):
    """Base exception for phi-orbits."""
    pass


class InputError(PhiOrbitsError):
    """An argument or configuration value is outside its documented range."""
    pass


class ArithmeticOverflowError(PhiOrbitsError):
    """A recurrence term left the unsigned 64-bit range."""
    pass


class ResourceLimitError(PhiOrbitsError):
    """A sieve, prime table or history exceeded its configured cap."""
    pass


class FactorizationCapError(PhiOrbitsError):
    """A cofactor is too large for general factorization."""
    pass


class CheckpointError(PhiOrbitsError):
    """Checkpoint operation failed."""
    pass


class ConfigMismatchError(CheckpointError):
    """Checkpoint was written by a different configuration."""
    pass


class VerificationError(PhiOrbitsError):
    """An independently re-checked artifact does not hold."""
    pass
