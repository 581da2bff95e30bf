"""Sampled super-/subsolution certification of scalar fields."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field

from pbarrier.core.fields import ScalarField
from pbarrier.core.models import PParams
from pbarrier.geometry.domains import DomainGeometry
from pbarrier.geometry.sampling import sample_domain
from pbarrier.residual.operators import DEGENERATE_FLOOR, evaluate_operator

logger = logging.getLogger(__name__)

Sense = Literal["super", "sub", "solution"]

DEFAULT_STEP_FRACTION = 1e-4
EXCLUDED_WARN_FRACTION = 0.01


class CertRecord(BaseModel):
    """One sampled point of a certification run."""

    x: list[float]
    t: float
    residual: float | None
    scale: float | None = Field(None, description="max(1, |a∂ₜw| + |Δ_p w|), diagnostic only")
    status: Literal["pass", "violation", "excluded"]


class CertReport(BaseModel):
    """Outcome of a certification run."""

    label: str = Field(..., description="Field label")
    sense: Sense
    points_sampled: int
    passes: int
    violations: int
    excluded_degenerate: int
    min_residual: float | None = Field(None, description="Minimum of a·∂ₜw − Δ_p w")
    max_residual: float | None = Field(None, description="Maximum of a·∂ₜw − Δ_p w")
    worst_point: list[float] | None = Field(
        None, description="(x..., t) of the largest violation"
    )
    max_scale: float | None = Field(
        None, description="Largest max(1, |a∂ₜw| + |Δ_p w|) over the sample; size of the cancelling terms"
    )
    tol: float
    seed: int
    step: float
    floor: float
    records: list[CertRecord] | None = None

    @property
    def excluded_fraction(self) -> float:
        return self.excluded_degenerate / self.points_sampled if self.points_sampled else 0.0

    @property
    def passed(self) -> bool:
        return self.points_sampled > 0 and self.violations == 0


def _violating(residual: np.ndarray, tol: float, sense: Sense) -> np.ndarray:
    if sense == "super":
        return residual < -tol
    if sense == "sub":
        return residual > tol
    return np.abs(residual) > tol


def _evaluate_chunks(field, params, X, T, step, closed_form, floor, workers):
    if workers <= 1 or X.shape[0] < 2 * workers:
        ops = evaluate_operator(field, params, X, T, step, closed_form, floor)
        return ops.residual, ops.scale, ops.degenerate
    chunks = np.array_split(np.arange(X.shape[0]), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(
            pool.map(
                lambda idx: evaluate_operator(
                    field, params, X[idx], T[idx], step, closed_form, floor
                ),
                chunks,
            )
        )
    return (
        np.concatenate([p.residual for p in parts]),
        np.concatenate([p.scale for p in parts]),
        np.concatenate([p.degenerate for p in parts]),
    )


def certify(
    field: ScalarField,
    params: PParams,
    domain: DomainGeometry,
    samples: int = 10_000,
    seed: int = 0,
    tol: float = 1e-8,
    *,
    step: float | None = None,
    sense: Sense = "super",
    floor: float = DEGENERATE_FLOOR,
    per_point: bool = False,
    workers: int = 1,
    closed_form: bool = True,
) -> CertReport:
    """Check the sign of a·∂ₜw − Δ_p w at low-discrepancy samples of domain.

    A point violates when its residual is more than tol on the wrong side
    for the requested sense. The operator scale max(1, |a∂ₜw| + |Δ_p w|) is
    reported alongside but never loosens the bound. Points whose gradient is
    below floor with p < 2 are excluded and counted separately.

    Args:
        field: Field to certify
        params: Equation parameters
        domain: Claimed domain
        samples: Number of sample points
        seed: Sampler seed
        tol: Absolute residual tolerance
        step: FD step; defaults to 1e-4 of the bbox diameter
        sense: "super", "sub" or "solution"
        floor: Degenerate-gradient floor
        per_point: Attach one record per sampled point
        workers: Thread workers evaluating chunks of the sample
        closed_form: Use attached closed-form derivatives when present

    Returns:
        The CertReport; points_sampled is 0 when the domain has no interior
        points at margin 2·step
    """
    if step is None:
        step = DEFAULT_STEP_FRACTION * domain.bbox.diameter
    X, T = sample_domain(domain, samples, seed=seed, margin=2.0 * step)
    N = X.shape[0]
    if N == 0:
        logger.warning(f"Certification of {field.label}: empty sample set at step {step:g}")
        return CertReport(
            label=field.label, sense=sense, points_sampled=0, passes=0, violations=0,
            excluded_degenerate=0, tol=tol, seed=seed, step=step, floor=floor,
            records=[] if per_point else None,
        )

    residual, scale, degenerate = _evaluate_chunks(
        field, params, X, T, step, closed_form, floor, workers
    )
    nonfinite = ~np.isfinite(residual) & ~degenerate
    violating = (_violating(residual, tol, sense) | nonfinite) & ~degenerate
    passing = ~violating & ~degenerate

    valid = residual[~degenerate & np.isfinite(residual)]
    worst = None
    if violating.any():
        excess = np.where(violating, np.abs(np.nan_to_num(residual, nan=np.inf)), -1.0)
        i = int(np.argmax(excess))
        worst = [*X[i].tolist(), float(T[i])]

    records = None
    if per_point:
        status = np.where(degenerate, "excluded", np.where(violating, "violation", "pass"))
        records = [
            CertRecord(
                x=X[i].tolist(),
                t=float(T[i]),
                residual=float(residual[i]) if np.isfinite(residual[i]) else None,
                scale=float(scale[i]) if np.isfinite(scale[i]) else None,
                status=str(status[i]),
            )
            for i in range(N)
        ]

    report = CertReport(
        label=field.label,
        sense=sense,
        points_sampled=N,
        passes=int(passing.sum()),
        violations=int(violating.sum()),
        excluded_degenerate=int(degenerate.sum()),
        min_residual=float(valid.min()) if valid.size else None,
        max_residual=float(valid.max()) if valid.size else None,
        worst_point=worst,
        max_scale=float(np.nanmax(scale)) if np.isfinite(scale).any() else None,
        tol=tol,
        seed=seed,
        step=step,
        floor=floor,
        records=records,
    )
    if report.excluded_fraction > EXCLUDED_WARN_FRACTION:
        logger.warning(
            f"{field.label}: {report.excluded_fraction:.2%} of samples excluded as degenerate"
        )
    logger.info(
        f"Certified {field.label} as {sense}: {report.violations} violations "
        f"in {N} samples (min residual {report.min_residual})"
    )
    return report
