"""Parameter models for the p-parabolic equation a·∂ₜu = Δ_p u.

Models are immutable pydantic records; everything downstream treats them
as values.
"""

from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from pbarrier.core.errors import ParameterError


class PParams(BaseModel):
    """Exponent, dimension and time multiplier of the equation."""

    model_config = ConfigDict(frozen=True)

    p: float = Field(..., gt=1.0, description="Exponent of the p-Laplacian")
    n: int = Field(1, ge=1, description="Spatial dimension")
    a: float = Field(1.0, gt=0.0, description="Multiplier of the time derivative")

    def lambda_(self) -> float:
        """Return λ = n(p−2)+p."""
        return self.n * (self.p - 2.0) + self.p

    @property
    def is_degenerate(self) -> bool:
        return self.p > 2.0

    @property
    def is_singular(self) -> bool:
        return self.p < 2.0

    def requires_p_not_two(self, context: str) -> None:
        """Raise ParameterError when a formula containing 1/(p−2) is requested at p = 2."""
        if self.p == 2.0:
            raise ParameterError(
                f"{context} requires p != 2 (the construction divides by p-2)"
            )

    def with_multiplier(self, a: float) -> PParams:
        return self.model_copy(update={"a": a})


class SpaceTimePoint(BaseModel):
    """A point ξ = (x, t) of R^{n+1}."""

    model_config = ConfigDict(frozen=True)

    x: tuple[float, ...] = Field(..., min_length=1, description="Spatial coordinates")
    t: float = Field(..., description="Time coordinate")

    @field_validator("x", mode="before")
    @classmethod
    def _coerce_x(cls, value):
        if isinstance(value, (int, float)):
            return (float(value),)
        return tuple(float(v) for v in value)

    @property
    def n(self) -> int:
        return len(self.x)

    def as_arrays(self) -> tuple[np.ndarray, float]:
        return np.asarray(self.x, dtype=float), float(self.t)

    def distance_to(self, other: SpaceTimePoint) -> float:
        dx = sum((a - b) ** 2 for a, b in zip(self.x, other.x))
        return math.sqrt(dx + (self.t - other.t) ** 2)

    def check_dimension(self, params: PParams) -> None:
        if self.n != params.n:
            raise ParameterError(
                f"point has {self.n} spatial coordinates, parameters declare n={params.n}"
            )

    @classmethod
    def origin(cls, n: int) -> SpaceTimePoint:
        return cls(x=(0.0,) * n, t=0.0)


def lambda_of(params: PParams) -> float:
    """Return λ = n(p−2)+p for the given parameters."""
    return params.lambda_()
