"""Exception hierarchy shared across the package.

`ConfigurationError` covers anything the caller can fix by changing inputs
(CLI exit code 2); `NumericalFailure` covers computations that could not be
completed (exit code 3). Findings such as a failed comparison check are
reported in result models and never raised.
"""
from __future__ import annotations

from typing import Optional


class DelayGaugeError(Exception):
    """Root of every error raised by delaygauge."""


class ConfigurationError(DelayGaugeError, ValueError):
    """Raised when inputs violate a documented precondition."""


class NumericalFailure(DelayGaugeError, ArithmeticError):
    """Raised when a numerical kernel cannot produce a trustworthy result."""


class ConvergenceError(NumericalFailure):
    """Raised when an iterative kernel exhausts its iteration budget."""


class OverflowFailure(NumericalFailure):
    """Raised when a result contains non-finite entries."""


class SingularMatrixError(NumericalFailure):
    """Raised when an LU pivot falls below the singularity threshold."""

    def __init__(self, message: str, pivot: float, index: Optional[int] = None):
        super().__init__(message)
        self.pivot = pivot
        self.index = index


class PoleError(NumericalFailure):
    """Raised when an isospectral reduction is evaluated at a pole."""

    def __init__(self, message: str, lam: complex):
        super().__init__(message)
        self.lam = lam


class DivergenceError(NumericalFailure):
    """Raised when an integrated state stops being finite."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class DegenerateSignalError(NumericalFailure):
    """Raised when a correlation is asked of a (numerically) constant signal."""


class DelayBoundError(ConfigurationError):
    """Raised when a delay component leaves [0, T]."""

    def __init__(self, message: str, component: int, time: float):
        super().__init__(message)
        self.component = component
        self.time = time


class HistoryUnderrunError(ConfigurationError):
    """Raised when a delayed argument reaches before the stored history."""

    def __init__(self, message: str, component: int, time: float):
        super().__init__(message)
        self.component = component
        self.time = time


__all__ = [
    "DelayGaugeError",
    "ConfigurationError",
    "NumericalFailure",
    "ConvergenceError",
    "OverflowFailure",
    "SingularMatrixError",
    "PoleError",
    "DivergenceError",
    "DegenerateSignalError",
    "DelayBoundError",
    "HistoryUnderrunError",
]
