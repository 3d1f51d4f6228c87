"""Exception types raised across the package."""


class QobsentError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(QobsentError, ValueError):
    """A lattice, partition or parameter set violates its constraints."""


class InvalidPartitionError(InvalidSpecError):
    pass


class DimensionMismatchError(QobsentError, ValueError):
    pass


class UnsupportedPartitionError(QobsentError, ValueError):
    """Requested bipartition cannot be handled (e.g. non-contiguous sites)."""


class UnsupportedComparisonError(QobsentError, TypeError):
    """Two coarse-grainings cannot be compared for refinement reliably."""


class ValidationError(QobsentError, ValueError):
    """An operator or state fails a structural check (Hermiticity, PSD, norm)."""


class NumericalConsistencyError(QobsentError, ArithmeticError):
    """Roundoff exceeded what the algorithm tolerates."""


class OutOfSupportError(QobsentError, ValueError):
    pass


class ConfigError(QobsentError, ValueError):
    """Run configuration is malformed or violates a constraint."""
