"""Reproducible low-discrepancy sampling of domain points."""

from __future__ import annotations

import logging

import numpy as np
from scipy.stats import qmc

from pbarrier.core.models import SpaceTimePoint
from pbarrier.geometry.domains import DomainGeometry

logger = logging.getLogger(__name__)

MAX_DRAW_FACTOR = 64


def _with_margin(domain: DomainGeometry, X: np.ndarray, T: np.ndarray, margin: float) -> np.ndarray:
    """Points whose axis-aligned stencil of half-width margin stays inside the domain."""
    keep = domain.contains_points(X, T)
    if margin <= 0 or not keep.any():
        return keep
    for axis in range(domain.n + 1):
        for sign in (1.0, -1.0):
            Xs, Ts = X.copy(), T.copy()
            if axis == domain.n:
                Ts = Ts + sign * margin
            else:
                Xs[:, axis] += sign * margin
            keep &= domain.contains_points(Xs, Ts)
    return keep


def sample_domain(
    domain: DomainGeometry,
    count: int,
    seed: int = 0,
    margin: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw up to count domain points from a scrambled Halton sequence over the bbox.

    Points closer than margin (along any axis) to the boundary are rejected.

    Returns:
        (X, T) with X of shape (N, n), N <= count
    """
    dim = domain.n + 1
    sampler = qmc.Halton(d=dim, scramble=True, seed=seed)
    lo = np.asarray(domain.bbox.lower)
    hi = np.asarray(domain.bbox.upper)
    kept_X, kept_T = [], []
    total = 0
    drawn = 0
    batch = max(256, count)
    while total < count and drawn < MAX_DRAW_FACTOR * count:
        U = qmc.scale(sampler.random(batch), lo, hi)
        drawn += batch
        X, T = U[:, :-1], U[:, -1]
        keep = _with_margin(domain, X, T, margin)
        kept_X.append(X[keep])
        kept_T.append(T[keep])
        total += int(keep.sum())
    if total == 0:
        logger.warning(f"No interior points of {domain.label} with margin {margin:g}")
        return np.empty((0, domain.n)), np.empty(0)
    X = np.concatenate(kept_X)[:count]
    T = np.concatenate(kept_T)[:count]
    if X.shape[0] < count:
        logger.warning(f"Only {X.shape[0]}/{count} points sampled in {domain.label}")
    return X, T


def sample_near(
    domain: DomainGeometry,
    center: SpaceTimePoint,
    radius: float,
    count: int,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw domain points within distance radius of center.

    Radially symmetric domains centered at x = 0 are sampled in the slice
    {|x| < min(y(t), radius)} so that thin cusps are still hit; other
    domains use rejection from the box around the center.
    """
    n = domain.n
    xc = np.asarray(center.x, dtype=float)
    tc = float(center.t)
    sampler = qmc.Halton(d=n + 1, scramble=True, seed=seed)
    kept_X, kept_T = [], []
    total = 0
    for _ in range(MAX_DRAW_FACTOR):
        U = sampler.random(max(256, count))
        if domain.radial_extent is not None and np.allclose(xc, 0.0):
            T = tc - radius * U[:, -1]
            with np.errstate(all="ignore"):
                ymax = np.minimum(np.nan_to_num(domain.radial_extent(T)), radius)
            # the cube of half-side y/√n lies inside the ball |x| < y
            X = (2.0 * U[:, :-1] - 1.0) * (ymax / np.sqrt(n))[:, None]
        else:
            X = xc + radius * (2.0 * U[:, :-1] - 1.0)
            T = tc + radius * (2.0 * U[:, -1] - 1.0)
        dist2 = np.sum((X - xc) ** 2, axis=1) + (T - tc) ** 2
        keep = domain.contains_points(X, T) & (dist2 < radius**2)
        kept_X.append(X[keep])
        kept_T.append(T[keep])
        total += int(keep.sum())
        if total >= count:
            break
    if total == 0:
        return np.empty((0, n)), np.empty(0)
    return np.concatenate(kept_X)[:count], np.concatenate(kept_T)[:count]
