"""Exception hierarchy.

Each error maps onto one of three CLI exit classes: configuration (2),
data (3) and numerics (4).
"""

from __future__ import annotations


class LevyItoError(Exception):
    """Base class for all package errors."""

    exit_code = 4


class ConfigError(LevyItoError, ValueError):
    """Invalid model, scenario or coefficient specification."""

    exit_code = 2


class UnsupportedError(ConfigError):
    """Requested capability is not available for this model kind."""


class DataError(LevyItoError, ValueError):
    """Malformed or inconsistent input data."""

    exit_code = 3


class CurveError(DataError):
    """Yield curve violates monotonicity or positive-forward requirements."""


class NumericsError(LevyItoError, ArithmeticError):
    """A numerical procedure failed or produced an inadmissible value."""

    exit_code = 4


class DomainError(NumericsError):
    """Argument outside the domain of a function or an invariant breached."""


class GridError(NumericsError):
    """Time grid inconsistent with the jump events it must carry."""


class QuadratureError(NumericsError):
    """Quadrature failed its refinement check."""


class TailError(QuadratureError):
    """Semi-infinite integral still has a non-negligible tail at the cutoff."""


class PositivityError(NumericsError):
    """A quantity required to be strictly positive was not."""


class PathError(NumericsError):
    """Wraps an exception raised while evaluating a per-path functional."""

    def __init__(self, path_index: int, cause: BaseException):
        super().__init__(f"path {path_index}: {cause!r}")
        self.path_index = path_index
        self.cause = cause
