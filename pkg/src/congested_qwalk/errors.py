"""Exception hierarchy shared across the simulator."""


class QWalkError(Exception):
    """Base class for all simulator errors."""


class ConfigError(QWalkError, ValueError):
    """Invalid parameters, mismatched shapes or out-of-range positions."""


class EdgeError(ConfigError):
    """Amplitude would be shifted off the allocated lattice."""


class CapacityError(QWalkError):
    """A reference computation was asked for a basis larger than its cap."""


class ValidationError(QWalkError, ValueError):
    """An object violates a structural invariant (e.g. not a density matrix)."""


class PreconditionError(QWalkError, ValueError):
    """An operation was called outside its documented precondition."""
