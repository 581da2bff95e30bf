"""Regularity probes: does the discrete solution attain f(ξ₀) = 0 at ξ₀?

The probe solves with the datum g(ξ) = |ξ − ξ₀|^α and measures

    D(r, h) = sup{|u| over active cells in the window W(r) around ξ₀}

for a ladder of radii and grid refinements. A finite-grid verdict is only
ever "consistent with" regularity or irregularity.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Literal, Sequence

import numpy as np
from pydantic import BaseModel, Field

from pbarrier.core.errors import ParameterError
from pbarrier.core.models import PParams, SpaceTimePoint
from pbarrier.geometry.domains import DomainGeometry, suggest
from pbarrier.geometry.mask import rasterize
from pbarrier.geometry.sampling import sample_near
from pbarrier.solver.grid import GridSolution
from pbarrier.solver.marching import solve_masked, suggested_levels

logger = logging.getLogger(__name__)

Verdict = Literal["consistent-with-regular", "consistent-with-irregular", "inconclusive"]

DEFAULT_REFINEMENTS = (1.0 / 32, 1.0 / 64, 1.0 / 128)
RADII_COUNT = 6
REGULAR_FRACTION = 0.1
PLATEAU_RATIO = 0.75
IRREGULAR_VARIATION = 0.1
GRID_BIAS = 2.0
LEVEL_GAP = 1e-12
PROBE_POINTS = ("lateral", "earliest", "origin-final")


class ProbeReport(BaseModel):
    """Deviation table and verdict of one probe."""

    target: SpaceTimePoint
    datum: str = Field(..., description="Boundary datum, e.g. |xi - xi0|^1")
    alpha: float
    window: Literal["past", "future"]
    radii: list[float]
    refinements: list[float]
    deviations: list[list[float | None]] = Field(
        ..., description="D(r, h); one row per refinement, one column per radius"
    )
    datum_scale: float
    verdict: Verdict
    reason: str
    steps: list[int] = Field(default_factory=list)

    def rows(self):
        """Yield CSV rows r, h, deviation."""
        for h, row in zip(self.refinements, self.deviations):
            for r, d in zip(self.radii, row):
                yield [r, h, "" if d is None else d]


def probe_point(domain: DomainGeometry, name: str) -> SpaceTimePoint:
    """Named boundary points: lateral, earliest or origin-final.

    lateral is the midpoint of the lower face x_0 = a_0 of the bbox,
    earliest the spatial center at the initial time, origin-final the
    spatial origin at the final time.
    """
    lo, hi = np.asarray(domain.bbox.lower), np.asarray(domain.bbox.upper)
    mid = 0.5 * (lo + hi)
    n = domain.n
    if name == "lateral":
        x = mid[:n].copy()
        x[0] = lo[0]
        return SpaceTimePoint(x=tuple(x), t=float(mid[-1]))
    if name == "earliest":
        return SpaceTimePoint(x=tuple(mid[:n]), t=float(lo[-1]))
    if name == "origin-final":
        return SpaceTimePoint(x=(0.0,) * n, t=float(hi[-1]))
    raise ParameterError(f"unknown probe point '{name}'{suggest(name, PROBE_POINTS)}")


def _check_boundary_point(domain: DomainGeometry, xi0: SpaceTimePoint) -> None:
    if domain.contains_point(xi0):
        raise ParameterError(f"probe target {xi0} lies inside {domain.label}, not on its boundary")
    X, _ = sample_near(domain, xi0, 0.05 * domain.bbox.diameter, 16)
    if X.shape[0] == 0:
        raise ParameterError(f"probe target {xi0} is not on the boundary of {domain.label}")


def probe_length(domain: DomainGeometry) -> float:
    """Unit of the default grid ladder: the widest spatial side of the bbox, capped at 1."""
    lo, hi = np.asarray(domain.bbox.lower[:-1]), np.asarray(domain.bbox.upper[:-1])
    return float(min(1.0, np.max(hi - lo)))


def probe_partition(
    t0: float,
    radii: Sequence[float],
    window: str,
    t_range: tuple[float, float],
    h: float,
    level_factor: float = 1.0,
) -> np.ndarray:
    """Time levels over the slab of depth r_max² next to t0.

    Levels have length about level_factor·h, and every t0 ∓ r² inside the
    slab is a level boundary, so each window W(r) is a union of whole levels.
    """
    t_lo, t_hi = t_range
    depth = radii[0] ** 2
    if window == "past":
        lo, hi = max(t_lo, t0 - depth), t0
        marks = [t0 - r * r for r in radii]
    else:
        lo, hi = t0, min(t_hi, t0 + depth)
        marks = [t0 + r * r for r in radii]
    if hi - lo <= LEVEL_GAP:
        raise ParameterError(f"no {window} time slab next to t={t0} inside ({t_lo}, {t_hi})")
    uniform = np.linspace(lo, hi, suggested_levels(hi - lo, h, level_factor) + 1)
    levels = np.unique(np.concatenate([uniform, [m for m in marks if lo < m < hi]]))
    levels = levels[np.concatenate([[True], np.diff(levels) > LEVEL_GAP])]
    levels[-1] = hi
    return levels


def _windows(
    sol: GridSolution, xi0: SpaceTimePoint, radii: Sequence[float], window: str
) -> list[float | None]:
    mask = sol.mask
    x0, t0 = xi0.as_arrays()
    dist2 = np.sum((mask.centers() - x0) ** 2, axis=-1)
    starts, ends = mask.levels[:-1], mask.levels[1:]
    out: list[float | None] = []
    for r in radii:
        if window == "past":
            levels = np.nonzero((starts >= t0 - r * r - LEVEL_GAP) & (ends <= t0 + LEVEL_GAP))[0]
        else:
            levels = np.nonzero((starts >= t0 - LEVEL_GAP) & (ends <= t0 + r * r + LEVEL_GAP))[0]
        best = None
        for k in levels:
            sel = mask.active[k] & (dist2 < r * r)
            if sel.any():
                d = float(np.max(np.abs(sol.values[k][sel])))
                best = d if best is None else max(best, d)
        out.append(best)
    return out


def _has_past(domain: DomainGeometry, xi0: SpaceTimePoint, r: float) -> bool:
    x0, t0 = xi0.as_arrays()
    t_lo = domain.bbox.t_range[0]
    return t0 - t_lo > 1e-12 and sample_near(domain, xi0, r, 64)[1].min(initial=np.inf) < t0


def _verdict(
    D: list[list[float | None]],
    radii: list[float],
    refinements: list[float],
    datum_scale: float,
) -> tuple[Verdict, str]:
    finest = D[-1]
    usable = [i for i, d in enumerate(finest) if d is not None]
    if len(usable) < 3:
        return "inconclusive", f"only {len(usable)} radii contain active cells at the finest grid"
    d_small = finest[usable[-1]]

    h_stable = True
    for coarse, fine, h_c in zip(D[:-1], D[1:], refinements[:-1]):
        for i in usable:
            if coarse[i] is not None and fine[i] is not None and fine[i] > coarse[i] + GRID_BIAS * h_c:
                h_stable = False
    r_decreasing = all(finest[b] <= finest[a] for a, b in zip(usable, usable[1:]))
    small = d_small < REGULAR_FRACTION * datum_scale
    if small and r_decreasing and h_stable:
        return (
            "consistent-with-regular",
            f"D(r_min, h_min) = {d_small:.3g} < {REGULAR_FRACTION}·datum scale and D decreases in r and h",
        )

    # two dyadic halvings of r; any decay D ~ r^κ with κ > 0.2 drops below the ratio
    plateau = d_small >= PLATEAU_RATIO * finest[usable[-3]]
    settled = False
    if len(D) >= 2:
        previous = D[-2]
        common = [i for i in usable if previous[i] is not None]
        settled = len(common) >= 2 and all(
            abs(finest[i] - previous[i]) <= IRREGULAR_VARIATION * finest[i] for i in common
        )
    if not small and plateau and settled:
        return (
            "consistent-with-irregular",
            f"D(r, h_min) levels off at {d_small:.3g} >= {REGULAR_FRACTION}·datum scale as r decreases, "
            "stable across the finest grids",
        )
    return (
        "inconclusive",
        f"D(r_min, h_min) = {d_small:.3g}; decreasing in r: {r_decreasing}, stable in h: {h_stable}, "
        f"levels off: {plateau}, settled: {settled}",
    )


def regularity_probe(
    params: PParams,
    domain: DomainGeometry,
    xi0: SpaceTimePoint,
    refinements: Sequence[float] | None = None,
    *,
    r_max: float | None = None,
    alpha: float = 1.0,
    level_factor: float = 1.0,
    workers: int = 1,
    on_solution: Callable[[GridSolution], None] | None = None,
) -> ProbeReport:
    """Probe the boundary point ξ₀ of a domain for regularity.

    Args:
        params: Equation parameters
        domain: Domain whose boundary contains ξ₀
        xi0: Target boundary point
        refinements: Grid spacings, coarse to fine; DEFAULT_REFINEMENTS times
            probe_length(domain) when None
        r_max: Largest window radius; 0.25·bbox diameter capped at 0.5 by default
        alpha: Exponent of the datum |ξ − ξ₀|^α
        level_factor: Mask levels have length level_factor·h
        workers: Refinements solved concurrently
        on_solution: Called with each refinement's GridSolution, coarse to fine

    Returns:
        ProbeReport with D(r, h) and the verdict

    Only the slab of depth r_max² next to ξ₀ is solved; regularity is local
    and the future of a past window never enters it.

    Raises:
        ParameterError: If ξ₀ is not a boundary point of the domain
    """
    if alpha <= 0:
        raise ParameterError(f"datum exponent must be positive, got {alpha}")
    if refinements is None:
        refinements = [h * probe_length(domain) for h in DEFAULT_REFINEMENTS]
    refinements = sorted((float(h) for h in refinements), reverse=True)
    if not refinements:
        raise ParameterError("need at least one grid refinement")
    xi0.check_dimension(params)
    _check_boundary_point(domain, xi0)
    x0, t0 = xi0.as_arrays()
    if r_max is None:
        r_max = min(0.5, 0.25 * domain.bbox.diameter)
    radii = [r_max * 2.0**-m for m in range(RADII_COUNT)]
    window = "past" if _has_past(domain, xi0, r_max) else "future"

    def datum(X, T):
        return (np.sum((X - x0) ** 2, axis=1) + (T - t0) ** 2) ** (0.5 * alpha)

    def run(h: float) -> GridSolution:
        levels = probe_partition(float(t0), radii, window, domain.bbox.t_range, h, level_factor)
        mask = rasterize(domain, h, levels)
        return solve_masked(params, mask, datum, label=f"probe[{domain.label},h={h:g}]")

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        solutions = list(pool.map(run, refinements))
    if on_solution is not None:
        for sol in solutions:
            on_solution(sol)

    D = [_windows(sol, xi0, radii, window) for sol in solutions]
    datum_scale = (r_max * math.sqrt(1.0 + r_max**2)) ** alpha
    verdict, reason = _verdict(D, radii, refinements, datum_scale)
    logger.info(f"Probe of {domain.label} at {xi0.x},{xi0.t}: {verdict} ({reason})")
    return ProbeReport(
        target=xi0,
        datum=f"|xi - xi0|^{alpha:g}",
        alpha=alpha,
        window=window,
        radii=radii,
        refinements=refinements,
        deviations=D,
        datum_scale=datum_scale,
        verdict=verdict,
        reason=reason,
        steps=[sol.steps for sol in solutions],
    )
