"""Rasterization of space-time domains to per-level active-cell masks.

A mask level k covers the time interval [τ_k, τ_{k+1}]; a cell is active at
level k when its center, taken at the interval midpoint, lies in the
domain. Spatial cells are either cell-centered (centers at (i+½)h from the
bbox corner) or node-aligned (centers at i·h), and the grid always carries
one inactive pad layer on each side so that every active cell has ghost
neighbours.
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import ndimage

from pbarrier.core.errors import ParameterError
from pbarrier.geometry.domains import DomainGeometry

logger = logging.getLogger(__name__)

Align = Literal["cell", "node"]


@dataclass
class SpaceTimeMask:
    """Active cells of a rasterized domain."""

    h: float
    levels: np.ndarray
    axes: list[np.ndarray]
    active: np.ndarray
    exposed: np.ndarray
    final_time: np.ndarray
    align: Align = "cell"
    label: str = ""
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    @property
    def num_levels(self) -> int:
        return self.active.shape[0]

    @property
    def level_midpoints(self) -> np.ndarray:
        return 0.5 * (self.levels[:-1] + self.levels[1:])

    @property
    def is_empty(self) -> bool:
        return not self.active.any()

    def centers(self) -> np.ndarray:
        """Cell centers as an array of shape (*shape, n)."""
        grids = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(grids, axis=-1)

    def flat_centers(self) -> np.ndarray:
        return self.centers().reshape(-1, self.n)

    def checksum(self) -> str:
        """sha256 of the active array together with the grid."""
        digest = hashlib.sha256()
        digest.update(np.ascontiguousarray(self.active).tobytes())
        digest.update(np.asarray(self.levels, dtype=float).tobytes())
        for a in self.axes:
            digest.update(np.asarray(a, dtype=float).tobytes())
        return digest.hexdigest()

    def exposed_cells(self, k: int) -> list[tuple[tuple[int, ...], str]]:
        """Boundary-adjacent cells of level k with their classification."""
        cells = [(tuple(int(i) for i in idx), "lateral/earlier") for idx in np.argwhere(self.exposed[k])]
        cells += [(tuple(int(i) for i in idx), "final-time") for idx in np.argwhere(self.final_time[k])]
        return sorted(cells)

    def components(self, k: int) -> int:
        """Number of face-connected components of the active set at level k."""
        _, count = ndimage.label(self.active[k])
        return int(count)

    def rows(self):
        """Yield CSV rows t_index, cell_index..., active, exposed, final_time."""
        for k in range(self.num_levels):
            for idx in np.argwhere(self.active[k] | self.exposed[k] | self.final_time[k]):
                key = (k, *idx)
                yield [
                    k,
                    *(int(i) for i in idx),
                    int(self.active[key]),
                    int(self.exposed[key]),
                    int(self.final_time[key]),
                ]


def grid_axis(lo: float, hi: float, h: float, align: Align) -> np.ndarray:
    cells = math.ceil((hi - lo) / h - 1e-9)
    if align == "node":
        return lo + (np.arange(cells + 3) - 1.0) * h
    return lo + (np.arange(cells + 2) - 0.5) * h


def mask_from_active(
    active: np.ndarray,
    levels: np.ndarray,
    axes: list[np.ndarray],
    h: float,
    align: Align = "cell",
    label: str = "",
    params: dict | None = None,
) -> SpaceTimeMask:
    """Classify the boundary-adjacent cells of a given active array."""
    n = len(axes)
    structure = ndimage.generate_binary_structure(n, 1)
    lateral = np.zeros_like(active)
    for k in range(active.shape[0]):
        lateral[k] = active[k] & ~ndimage.binary_erosion(active[k], structure, border_value=0)
    entering = active.copy()
    entering[1:] &= ~active[:-1]
    final_time = active.copy()
    final_time[:-1] &= ~active[1:]
    exposed = (lateral | entering) & ~final_time
    return SpaceTimeMask(
        h=float(h),
        levels=np.asarray(levels, dtype=float),
        axes=axes,
        active=active,
        exposed=exposed,
        final_time=final_time,
        align=align,
        label=label,
        params=dict(params or {}),
    )


def time_partition(t_lo: float, t_hi: float, count: int) -> np.ndarray:
    if count < 1:
        raise ParameterError(f"need at least one time level, got {count}")
    return np.linspace(t_lo, t_hi, count + 1)


def rasterize(
    domain: DomainGeometry,
    h: float,
    dt_levels: int | np.ndarray | list[float],
    align: Align = "cell",
) -> SpaceTimeMask:
    """Rasterize a domain on a uniform spatial grid.

    Args:
        domain: Domain to rasterize
        h: Spatial grid spacing
        dt_levels: Either a number of uniform levels over the bbox time range
            or an explicit increasing partition τ_0 < … < τ_K
        align: "cell" for cell-centered grids, "node" for node-aligned grids

    Returns:
        The mask; empty when the domain does not meet the grid
    """
    if h <= 0:
        raise ParameterError(f"grid spacing must be positive, got {h}")
    t_lo, t_hi = domain.bbox.t_range
    if isinstance(dt_levels, (int, np.integer)):
        levels = time_partition(t_lo, t_hi, int(dt_levels))
    else:
        levels = np.asarray(dt_levels, dtype=float)
        if levels.ndim != 1 or levels.size < 2 or np.any(np.diff(levels) <= 0):
            raise ParameterError("time partition must be strictly increasing with >= 2 entries")

    axes = [
        grid_axis(domain.bbox.lower[i], domain.bbox.upper[i], h, align) for i in range(domain.n)
    ]
    grids = np.meshgrid(*axes, indexing="ij")
    shape = grids[0].shape
    X = np.stack([g.ravel() for g in grids], axis=1)
    mids = 0.5 * (levels[:-1] + levels[1:])

    active = np.zeros((mids.size, *shape), dtype=bool)
    for k, tm in enumerate(mids):
        active[k] = domain.contains_points(X, np.full(X.shape[0], tm)).reshape(shape)

    mask = mask_from_active(
        active, levels, axes, h, align=align, label=domain.label, params=domain.params
    )
    if mask.is_empty:
        logger.warning(f"Rasterizing {domain.label} at h={h} produced an empty mask")
    else:
        logger.debug(
            f"Rasterized {domain.label}: grid {shape}, {mids.size} levels, "
            f"{int(active.sum())} active cells"
        )
    return mask
