"""Exception taxonomy shared across the package."""

from __future__ import annotations

__all__ = [
    "BrlError",
    "DomainError",
    "ConfigError",
    "SingularPairError",
    "SeriesError",
    "PerronError",
    "SimplicityError",
    "SingularSystemError",
    "SymmetryError",
    "ScanError",
    "ConvergenceError",
]


class BrlError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BrlError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ConfigError(BrlError, ValueError):
    """A run configuration (file or flags) is malformed or inconsistent."""


class SingularPairError(DomainError):
    """Two evaluation points coincide where a kernel has a pole."""


class SeriesError(BrlError, ArithmeticError):
    """A series evaluation cannot certify its own accuracy."""


class PerronError(BrlError, ArithmeticError):
    """The ground eigenvector is not sign-definite or cannot be normalized."""


class SimplicityError(BrlError, ArithmeticError):
    """The smallest eigenvalue is too close to degenerate to differentiate."""


class SingularSystemError(BrlError, ArithmeticError):
    """A linear solve hit a (numerically) singular matrix."""


class SymmetryError(BrlError, ValueError):
    """Input data violates a symmetry the algorithm relies on."""


class ScanError(BrlError, ArithmeticError):
    """A grid scan could not bracket the feature it was asked to find."""


class ConvergenceError(BrlError, ArithmeticError):
    """An iterative routine exhausted its budget without converging."""
