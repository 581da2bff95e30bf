"""Explicit time marching on cylinders and masked space-time domains."""

from __future__ import annotations

import logging
import math
from collections import deque
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from pbarrier.core.errors import NumericalAbort, ParameterError
from pbarrier.core.models import PParams
from pbarrier.geometry.mask import SpaceTimeMask, grid_axis, mask_from_active, time_partition
from pbarrier.solver.grid import GridSolution
from pbarrier.solver.scheme import FluxScheme

logger = logging.getLogger(__name__)

BoundaryData = Callable[[np.ndarray, np.ndarray], np.ndarray]

MAX_STEPS = 5_000_000
MAX_PRINCIPLE_RTOL = 1e-12


def cylinder_mask(
    interval: tuple[float, float], T: float, h: float, levels: int = 1, t0: float = 0.0
) -> SpaceTimeMask:
    """Node-aligned mask of (a, b) × (t0, t0+T); the end nodes a and b are ghosts.

    Raises:
        ParameterError: If h does not divide b − a
    """
    a, b = interval
    if not b > a or T <= 0 or h <= 0:
        raise ParameterError(f"need a < b, T > 0 and h > 0, got ({a}, {b}), T={T}, h={h}")
    cells = round((b - a) / h)
    if cells < 2 or abs(cells * h - (b - a)) > 1e-9 * (b - a):
        raise ParameterError(f"h={h} does not divide the interval length {b - a}")
    axis = grid_axis(a, b, h, "node")
    active = np.zeros((levels, axis.size), dtype=bool)
    active[:, 2:cells + 1] = True
    return mask_from_active(
        active,
        time_partition(t0, t0 + T, levels),
        [axis],
        h,
        align="node",
        label=f"cylinder({a:g},{b:g})x({t0:g},{t0 + T:g})",
    )


def _march(
    params: PParams,
    mask: SpaceTimeMask,
    data: Sequence[BoundaryData],
    scheme: FluxScheme,
    dt_history: list[list[float]] | None = None,
    check_max_principle: bool = True,
) -> tuple[np.ndarray, np.ndarray, list[list[float]]]:
    """Advance every boundary datum of data over the mask with one shared dt history."""
    n = mask.n
    if n not in (1, 2):
        raise ParameterError(f"the solver supports n in {{1, 2}}, got n={n}")
    if dt_history is not None and len(dt_history) != mask.num_levels:
        raise ParameterError(
            f"dt history has {len(dt_history)} levels, mask has {mask.num_levels}"
        )
    shape = mask.shape
    batch = len(data)
    axes = tuple(range(1, n + 1))
    centers = mask.flat_centers()
    structure = ndimage.generate_binary_structure(n, 1)
    a_mult = params.a

    def datum(cells: np.ndarray, t: float) -> np.ndarray:
        X = centers[cells.ravel()]
        T = np.full(X.shape[0], t)
        return np.stack([np.asarray(g(X, T), dtype=float) for g in data])

    u = np.full((batch, *shape), np.nan)
    everywhere = np.ones(shape, dtype=bool)
    u[:, everywhere] = datum(everywhere, mask.levels[0])
    initial = u.copy()
    values = np.full((batch, mask.num_levels, *shape), np.nan)
    history: list[list[float]] = []
    previous = np.zeros(shape, dtype=bool)
    step = 0

    for k in range(mask.num_levels):
        act = mask.active[k]
        t, t_end = float(mask.levels[k]), float(mask.levels[k + 1])
        level_dts: list[float] = []
        if not act.any():
            history.append(level_dts)
            previous = act
            continue
        ghost = ndimage.binary_dilation(act, structure) & ~act
        neighbourhood = act | ghost
        entering = act & ~previous
        if entering.any():
            u[:, entering] = datum(entering, t)
        u[:, ~neighbourhood] = np.nan
        replay = None if dt_history is None else deque(dt_history[k])

        while True:
            u[:, ghost] = datum(ghost, t)
            if replay is not None:
                if not replay:
                    break
                dt = float(replay.popleft())
                last = not replay
            else:
                remaining = t_end - t
                dt = scheme.stable_dt(u, axes)
                last = dt >= remaining * (1.0 - 1e-12)
                if last:
                    dt = remaining
            old = u[:, neighbourhood]
            div = scheme.divergence(u, axes)
            u[:, act] += (dt / a_mult) * div[:, act]
            step += 1
            level_dts.append(dt)
            t = t_end if last else t + dt

            new = u[:, act]
            if not np.all(np.isfinite(new)):
                raise NumericalAbort(
                    f"non-finite state at level {k}, step {step} (t={t:.6g})", step=step
                )
            if check_max_principle:
                lo = np.min(old, axis=1, keepdims=True)
                hi = np.max(old, axis=1, keepdims=True)
                slack = MAX_PRINCIPLE_RTOL * np.maximum(1.0, np.max(np.abs(old), axis=1, keepdims=True))
                if np.any(new < lo - slack) or np.any(new > hi + slack):
                    raise NumericalAbort(
                        f"discrete maximum principle violated at level {k}, step {step}",
                        step=step,
                    )
            if step > MAX_STEPS:
                raise NumericalAbort(f"step budget {MAX_STEPS} exhausted at t={t:.6g}", step=step)
            if last:
                break

        values[:, k][:, act] = u[:, act]
        history.append(level_dts)
        previous = act
        logger.debug(f"{mask.label}: level {k + 1}/{mask.num_levels} done, {len(level_dts)} steps")

    return values, initial, history


def solve_masked_batch(
    params: PParams,
    mask: SpaceTimeMask,
    data: Sequence[BoundaryData],
    *,
    delta_scale: float = 1.0,
    dt_history: list[list[float]] | None = None,
    check_max_principle: bool = True,
    label: str | None = None,
) -> list[GridSolution]:
    """Solve for several boundary data on one mask with a shared dt history.

    The dt of every step is the smallest stable dt over the whole batch,
    so the runs are directly comparable cell by cell.
    """
    if mask.is_empty:
        raise ParameterError(f"mask {mask.label} has no active cells")
    scheme = FluxScheme.for_grid(params, mask.h, delta_scale)
    logger.info(
        f"Solving on {mask.label}: p={params.p}, a={params.a}, h={mask.h:g}, "
        f"{mask.num_levels} levels, batch={len(data)}"
    )
    values, initial, history = _march(
        params, mask, data, scheme, dt_history=dt_history, check_max_principle=check_max_principle
    )
    steps = sum(len(level) for level in history)
    logger.info(f"Finished {mask.label} after {steps} steps")
    return [
        GridSolution(
            mask=mask,
            params=params,
            values=values[b],
            initial=initial[b],
            dt_history=[list(level) for level in history],
            delta=scheme.delta,
            label=label or mask.label,
        )
        for b in range(len(data))
    ]


def solve_masked(
    params: PParams,
    mask: SpaceTimeMask,
    boundary_data: BoundaryData,
    *,
    delta_scale: float = 1.0,
    dt_history: list[list[float]] | None = None,
    check_max_principle: bool = True,
    label: str | None = None,
) -> GridSolution:
    """Solve a·∂ₜu = Δ_p u on the active cells of a mask.

    At each level, newly active cells start from the datum at the level's
    start time and inactive neighbours of active cells (ghosts) take the
    datum at the current time, evaluated at the ghost cell centers.

    Args:
        params: Equation parameters; n must be 1 or 2
        mask: Rasterized domain
        boundary_data: g(X, T), evaluable on all of R^{n+1}
        delta_scale: Flux regularisation δ = h·delta_scale
        dt_history: Per-level dt lists of a previous run to replay
        check_max_principle: Assert the discrete maximum principle at every step
        label: Label of the solution

    Returns:
        GridSolution with the state at the end of every level

    Raises:
        NumericalAbort: On non-finite states or a violated maximum principle
    """
    return solve_masked_batch(
        params,
        mask,
        [boundary_data],
        delta_scale=delta_scale,
        dt_history=dt_history,
        check_max_principle=check_max_principle,
        label=label,
    )[0]


def solve_cylinder_1d(
    params: PParams,
    interval: tuple[float, float],
    T: float,
    boundary_data: BoundaryData,
    h: float,
    *,
    levels: int = 1,
    t0: float = 0.0,
    delta_scale: float = 1.0,
    dt_history: list[list[float]] | None = None,
) -> GridSolution:
    """Solve on (a, b) × (t0, t0+T) with data g on the parabolic boundary.

    Nodes sit at a + i·h; the end nodes carry the lateral datum and the
    interior nodes start from g(·, t0). dt is adaptive with
    dt·max Φ_δ′ <= 0.45·a·h².
    """
    if params.n != 1:
        raise ParameterError(f"solve_cylinder_1d requires n = 1, got n={params.n}")
    mask = cylinder_mask(interval, T, h, levels=levels, t0=t0)
    return solve_masked(
        params, mask, boundary_data, delta_scale=delta_scale, dt_history=dt_history
    )


def suggested_levels(mask_span: float, h: float, factor: float = 1.0) -> int:
    """Number of uniform levels whose length is about factor·h."""
    return max(1, math.ceil(mask_span / (factor * h)))
