"""Indexed barrier families j ↦ w_j."""

from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import TYPE_CHECKING, Any, Callable

import numpy as np

from pbarrier.core.errors import ParameterError
from pbarrier.core.fields import ScalarField, as_points
from pbarrier.core.models import PParams, SpaceTimePoint

if TYPE_CHECKING:
    from pbarrier.geometry.domains import DomainGeometry

logger = logging.getLogger(__name__)


class BarrierFamily:
    """A family of fields indexed by j >= j_min together with its gauge.

    Attributes:
        name: Family kind (e.g. "petrovskii")
        params: Equation parameters
        domain: Domain on which every member is claimed super- (or sub-) parabolic
        xi0: The boundary point the family certifies
        j_min: Smallest admissible index
        sense: "super" for barrier families, "sub" for the ψ_j minorants
    """

    def __init__(
        self,
        name: str,
        params: PParams,
        member: Callable[[int], ScalarField],
        gauge: Callable[[np.ndarray, np.ndarray], np.ndarray],
        j_min: int,
        domain: DomainGeometry,
        xi0: SpaceTimePoint,
        *,
        sense: str = "super",
        calibration: Callable[[int], dict[str, Any]] | None = None,
        index_for_gauge: Callable[[float], int] | None = None,
        constants: dict[str, Any] | None = None,
    ):
        self.name = name
        self.params = params
        self._member = lru_cache(maxsize=32)(member)
        self._gauge = gauge
        self.j_min = int(j_min)
        self.domain = domain
        self.xi0 = xi0
        self.sense = sense
        self._calibration = calibration
        self._index_for_gauge = index_for_gauge
        self.constants = dict(constants or {})

    def __repr__(self) -> str:
        return f"BarrierFamily(name={self.name!r}, p={self.params.p}, n={self.params.n}, j_min={self.j_min})"

    def member(self, j: int) -> ScalarField:
        """Return w_j.

        Raises:
            ParameterError: If j < j_min
        """
        if int(j) != j or j < self.j_min:
            raise ParameterError(f"{self.name}: index j={j} below j_min={self.j_min}")
        return self._member(int(j))

    __call__ = member

    def gauge(self, x, t):
        """The gauge d of the strong-family condition w_{j(k)} >= k·d."""
        X, T, single = as_points(x, t, self.params.n)
        out = np.asarray(self._gauge(X, T), dtype=float)
        return out[0] if single else out

    def index_for_gauge(self, k: float) -> int:
        """Smallest documented index j(k) with w_{j(k)} >= k·d."""
        if self._index_for_gauge is None:
            return max(self.j_min, math.ceil(k))
        return self._index_for_gauge(k)

    def calibration(self, j: int) -> dict[str, Any]:
        """Constants used to build w_j, for reports."""
        data = {"family": self.name, "j": int(j), "j_min": self.j_min, **self.constants}
        if self._calibration is not None:
            data.update(self._calibration(int(j)))
        return data

    def ladder(self) -> list[int]:
        """The certification ladder j_min, 2·j_min, 10·j_min."""
        return [self.j_min, 2 * self.j_min, 10 * self.j_min]
