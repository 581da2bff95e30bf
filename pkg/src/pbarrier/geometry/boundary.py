"""Parabolic boundary of finite unions of open cylinders.

For a cylinder U = G×(t₁,t₂) the parabolic boundary is the closed bottom
together with the lateral boundary including its top edge. For a union,
the parabolic boundary is the union of the pieces minus the union of the
open cylinders.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from pbarrier.core.errors import ParameterError

ATOL = 1e-12


class Cylinder(BaseModel):
    """Open cylinder (lower, upper) × (t1, t2) with a box base."""

    model_config = ConfigDict(frozen=True)

    lower: tuple[float, ...] = Field(..., min_length=1)
    upper: tuple[float, ...] = Field(..., min_length=1)
    t1: float
    t2: float

    @model_validator(mode="after")
    def _check(self) -> Cylinder:
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper must have the same length")
        if any(b <= a for a, b in zip(self.lower, self.upper)) or self.t2 <= self.t1:
            raise ValueError("cylinder sides must have positive length")
        return self

    def _closed_base(self, x: np.ndarray) -> bool:
        return all(a - ATOL <= xi <= b + ATOL for xi, a, b in zip(x, self.lower, self.upper))

    def _open_base(self, x: np.ndarray) -> bool:
        return all(a < xi < b for xi, a, b in zip(x, self.lower, self.upper))

    def contains(self, x: np.ndarray, t: float) -> bool:
        return self._open_base(x) and self.t1 < t < self.t2

    def in_parabolic_boundary(self, x: np.ndarray, t: float) -> bool:
        bottom = self._closed_base(x) and abs(t - self.t1) <= ATOL
        lateral = (
            self._closed_base(x)
            and not self._open_base(x)
            and self.t1 < t <= self.t2 + ATOL
        )
        return bottom or lateral


class ParabolicBoundary:
    """Point-set predicate for ∂_p(∪ U^i)."""

    def __init__(self, cylinders: list[Cylinder]):
        if not cylinders:
            raise ParameterError("need at least one cylinder")
        dims = {len(c.lower) for c in cylinders}
        if len(dims) != 1:
            raise ParameterError("all cylinders must share the spatial dimension")
        self.cylinders = list(cylinders)
        self.n = dims.pop()

    def __call__(self, x, t: float) -> bool:
        return self.contains(x, t)

    def contains(self, x, t: float) -> bool:
        xv = np.atleast_1d(np.asarray(x, dtype=float))
        if xv.size != self.n:
            raise ParameterError(f"expected {self.n} spatial coordinates, got {xv.size}")
        in_pieces = any(c.in_parabolic_boundary(xv, t) for c in self.cylinders)
        in_union = any(c.contains(xv, t) for c in self.cylinders)
        return in_pieces and not in_union


def parabolic_boundary(
    union_of_cylinders: list[Cylinder | tuple],
) -> ParabolicBoundary:
    """Build the parabolic-boundary predicate of a finite union of cylinders.

    Args:
        union_of_cylinders: Cylinder models or tuples (lower, upper, t1, t2)

    Returns:
        A callable predicate (x, t) -> bool
    """
    cylinders = []
    for item in union_of_cylinders:
        if isinstance(item, Cylinder):
            cylinders.append(item)
            continue
        lower, upper, t1, t2 = item
        cylinders.append(
            Cylinder(
                lower=tuple(np.atleast_1d(lower).astype(float)),
                upper=tuple(np.atleast_1d(upper).astype(float)),
                t1=t1,
                t2=t2,
            )
        )
    return ParabolicBoundary(cylinders)
