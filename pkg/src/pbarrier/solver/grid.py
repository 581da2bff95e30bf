"""Discrete solutions on a rasterized space-time mask."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator

import numpy as np

from pbarrier.core.models import PParams
from pbarrier.geometry.mask import SpaceTimeMask


@dataclass
class GridSolution:
    """Per-level states of an explicit run.

    values[k] is the state at τ_{k+1} on the full padded grid; cells that
    are not active at level k hold NaN. initial is the state at τ_0 with
    the boundary datum on every cell.
    """

    mask: SpaceTimeMask
    params: PParams
    values: np.ndarray
    initial: np.ndarray
    dt_history: list[list[float]]
    delta: float
    label: str = ""
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        """End time τ_{k+1} of every level."""
        return self.mask.levels[1:]

    @property
    def steps(self) -> int:
        return sum(len(level) for level in self.dt_history)

    def final(self) -> np.ndarray:
        """State at the last level on its active cells (NaN elsewhere)."""
        return self.values[-1]

    def active_values(self, k: int) -> np.ndarray:
        return self.values[k][self.mask.active[k]]

    def sample(self, x, k: int = -1) -> np.ndarray:
        """Nearest-cell lookup of level k at spatial points x of shape (N, n)."""
        X = np.atleast_2d(np.asarray(x, dtype=float))
        idx = []
        for axis, a in enumerate(self.mask.axes):
            i = np.rint((X[:, axis] - a[0]) / self.mask.h).astype(int)
            idx.append(np.clip(i, 0, a.size - 1))
        return self.values[k][tuple(idx)]

    def rows(self) -> Iterator[list]:
        """Yield CSV rows t_index, cell_index..., value over active cells."""
        for k in range(self.mask.num_levels):
            for idx in np.argwhere(self.mask.active[k]):
                yield [k, *(int(i) for i in idx), float(self.values[k][tuple(idx)])]

    def csv_header(self) -> list[str]:
        return ["t_index", *(f"cell_index_{i}" for i in range(self.mask.n)), "value"]

    def manifest(self) -> dict[str, Any]:
        """JSON manifest: params, dt history, δ and mask checksum."""
        return {
            "label": self.label or self.mask.label,
            "params": self.params.model_dump(),
            "h": self.mask.h,
            "align": self.mask.align,
            "levels": self.mask.levels.tolist(),
            "shape": list(self.mask.shape),
            "delta": self.delta,
            "dt_history": self.dt_history,
            "steps": self.steps,
            "mask_checksum": self.mask.checksum(),
            **self.metadata,
        }
