"""Shared parameter, field and family abstractions."""

from pbarrier.core.errors import (
    ConvergenceError,
    DegenerateGradientError,
    NonFiniteError,
    NumericalAbort,
    ParameterError,
    PastingError,
    PBarrierError,
)
from pbarrier.core.family import BarrierFamily
from pbarrier.core.fields import ScalarField, as_points, constant_field, field_from_closure
from pbarrier.core.models import PParams, SpaceTimePoint, lambda_of

__all__ = [
    "BarrierFamily",
    "ConvergenceError",
    "DegenerateGradientError",
    "NonFiniteError",
    "NumericalAbort",
    "PBarrierError",
    "PParams",
    "ParameterError",
    "PastingError",
    "ScalarField",
    "SpaceTimePoint",
    "as_points",
    "constant_field",
    "field_from_closure",
    "lambda_of",
]
