"""Exception hierarchy shared by every pbarrier module.

The CLI maps these onto exit codes: parameter problems exit with 2,
numerical failures with 3.
"""

from __future__ import annotations


class PBarrierError(Exception):
    """Base class for all pbarrier errors."""


class ParameterError(PBarrierError, ValueError):
    """A parameter combination is outside the range a construction supports."""


class NonFiniteError(PBarrierError, ArithmeticError):
    """A field value or derivative evaluated to inf or nan."""


class DegenerateGradientError(PBarrierError, ArithmeticError):
    """The p-Laplacian was requested at a vanishing gradient with p < 2."""


class PastingError(PBarrierError):
    """The pasted field is discontinuous across the pasting interface."""

    def __init__(self, message: str, magnitude: float):
        super().__init__(message)
        self.magnitude = magnitude


class NumericalAbort(PBarrierError, RuntimeError):
    """The explicit solver produced a non-finite or non-monotone state."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class ConvergenceError(PBarrierError, RuntimeError):
    """An iterative method (Newton, maximisation) did not converge."""

    def __init__(self, message: str, history: list[float] | None = None):
        super().__init__(message)
        self.history = history or []
