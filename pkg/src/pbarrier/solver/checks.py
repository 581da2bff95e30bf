"""Discrete comparison and scaling checks built on the explicit solver."""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np
from pydantic import BaseModel, Field

from pbarrier.core.errors import ParameterError
from pbarrier.core.models import PParams
from pbarrier.geometry.domains import BoundingBox
from pbarrier.geometry.mask import SpaceTimeMask
from pbarrier.solver.marching import BoundaryData, solve_masked, solve_masked_batch

logger = logging.getLogger(__name__)


class ComparisonReport(BaseModel):
    """Ordering u₁ <= u₂ over every active cell of every pair."""

    label: str
    pairs: int
    tol: float
    min_slack: float = Field(..., description="min over pairs and cells of u₂ − u₁")
    max_slack: float
    worst_pair: int
    worst_cell: list[int] = Field(..., description="t_index followed by the cell indices")
    holds: bool


class ScalingReport(BaseModel):
    """Discrepancy between the a-multiplied run and the rescaled unmultiplied run."""

    label: str
    p: float
    a: float
    factor: float = Field(..., description="a^{1/(p−2)}")
    discrepancy: float = Field(..., description="max |u_a − factor·u_1| / (factor·max |u_1|)")
    max_abs: float
    data_scale: float
    tol: float
    steps: int
    passed: bool


def smooth_bump_pair(
    bbox: BoundingBox, seed: int, bumps: int = 3
) -> tuple[BoundaryData, BoundaryData]:
    """A seeded pair g₁ <= g₂ of sums of Gaussian bumps over the bbox.

    g₂ = g₁ + (nonnegative bumps), so the ordering holds everywhere.
    """
    rng = np.random.default_rng(seed)
    lo, hi = np.asarray(bbox.lower), np.asarray(bbox.upper)
    width = 0.25 * float(np.max(hi - lo))

    def draw(signed: bool):
        centers = lo + (hi - lo) * rng.random((bumps, lo.size))
        heights = rng.normal(size=bumps) if signed else rng.random(bumps)
        return centers, heights

    c1, a1 = draw(signed=True)
    c2, a2 = draw(signed=False)

    def bumps_at(X, T, centers, heights):
        Y = np.column_stack([X, T])
        d2 = np.sum((Y[:, None, :] - centers[None]) ** 2, axis=-1)
        return np.exp(-d2 / width**2) @ heights

    def g1(X, T):
        return bumps_at(X, T, c1, a1)

    def g2(X, T):
        return g1(X, T) + bumps_at(X, T, c2, a2)

    return g1, g2


def check_comparison(
    params: PParams,
    mask: SpaceTimeMask,
    pairs: Sequence[tuple[BoundaryData, BoundaryData]],
    tol: float = 1e-12,
) -> ComparisonReport:
    """Solve every pair on the mask with one shared dt history and check u₁ <= u₂ + tol.

    Raises:
        ParameterError: If some pair violates g₁ <= g₂ at a cell center and level time
    """
    if not pairs:
        raise ParameterError("need at least one pair of boundary data")
    centers = mask.flat_centers()
    for i, (g1, g2) in enumerate(pairs):
        for t in mask.levels:
            T = np.full(centers.shape[0], t)
            if np.any(g1(centers, T) > g2(centers, T)):
                raise ParameterError(f"pair {i}: g1 > g2 at some cell center at t={t:g}")

    data = [g for pair in pairs for g in pair]
    solutions = solve_masked_batch(params, mask, data, label=f"comparison[{mask.label}]")
    active = mask.active
    min_slack, max_slack = np.inf, -np.inf
    worst_pair, worst_cell = 0, [0]
    for i in range(len(pairs)):
        u1, u2 = solutions[2 * i].values, solutions[2 * i + 1].values
        slack = np.where(active, u2 - u1, np.inf)
        low = float(np.min(slack))
        high = float(np.max(np.where(active, u2 - u1, -np.inf)))
        max_slack = max(max_slack, high)
        if low < min_slack:
            min_slack = low
            worst_pair = i
            worst_cell = [int(v) for v in np.unravel_index(int(np.argmin(slack)), slack.shape)]
    holds = min_slack >= -tol
    report = ComparisonReport(
        label=mask.label,
        pairs=len(pairs),
        tol=tol,
        min_slack=min_slack,
        max_slack=max_slack,
        worst_pair=worst_pair,
        worst_cell=worst_cell,
        holds=holds,
    )
    if holds:
        logger.info(f"Comparison on {mask.label}: {len(pairs)} pairs ordered, min slack {min_slack:.3e}")
    else:
        logger.warning(
            f"Comparison on {mask.label}: pair {worst_pair} violates ordering by {-min_slack:.3e} "
            f"at cell {worst_cell}"
        )
    return report


def check_scaling_identity(
    params: PParams,
    a_mult: float,
    mask: SpaceTimeMask,
    f: BoundaryData,
    tol: float = 1e-10,
) -> ScalingReport:
    """Compare the a-multiplied run with data a^{1/(p−2)}f against a^{1/(p−2)} times the plain run.

    The multiplied run replays the dt history of the plain run and uses the
    regularisation δ scaled by the same factor, so both runs see the same
    sequence of updates.

    Raises:
        ParameterError: If p = 2 or a_mult <= 0
    """
    params.requires_p_not_two("the scaling identity")
    if a_mult <= 0:
        raise ParameterError(f"the multiplier must be positive, got {a_mult}")
    factor = a_mult ** (1.0 / (params.p - 2.0))
    plain = solve_masked(params.with_multiplier(1.0), mask, f, label=f"scaling-plain[{mask.label}]")

    def scaled(X, T):
        return factor * f(X, T)

    multiplied = solve_masked(
        params.with_multiplier(a_mult),
        mask,
        scaled,
        delta_scale=factor,
        dt_history=plain.dt_history,
        label=f"scaling-a[{mask.label}]",
    )
    active = mask.active
    diff = np.abs(multiplied.values[active] - factor * plain.values[active])
    data_scale = factor * float(np.max(np.abs(plain.values[active])))
    max_abs = float(np.max(diff))
    discrepancy = max_abs / data_scale if data_scale > 0 else max_abs
    report = ScalingReport(
        label=mask.label,
        p=params.p,
        a=a_mult,
        factor=factor,
        discrepancy=discrepancy,
        max_abs=max_abs,
        data_scale=data_scale,
        tol=tol,
        steps=plain.steps,
        passed=discrepancy <= tol,
    )
    logger.info(f"Scaling identity p={params.p}, a={a_mult}: discrepancy {discrepancy:.3e}")
    return report
