"""Pasting of an inner field over an outer one on a subregion.

The pasted field is min{outer, inner} on the region G and outer elsewhere.
It is continuous when inner >= outer on ∂G ∩ Θ, which is checked by
sampling interface points.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.stats import qmc

from pbarrier.core.errors import ParameterError, PastingError
from pbarrier.core.fields import ScalarField
from pbarrier.geometry.domains import DomainGeometry

logger = logging.getLogger(__name__)

BISECTION_STEPS = 52
COLLAR_STEPS = 4.0
INTERFACE_PADDING = 0.5


def interface_points(
    region: DomainGeometry,
    domain: DomainGeometry | None = None,
    samples: int = 1000,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Points of ∂G (∩ Θ when a domain is given) found by bisecting in/out pairs.

    Pairs are formed from a scrambled Halton cloud around the region; each
    pair straddles ∂G and is bisected to machine precision. The returned
    points are the outside ends of the bisected segments.
    """
    box = region.bbox.padded(INTERFACE_PADDING)
    if domain is not None:
        box = box.intersect(domain.bbox)
    lo, hi = np.asarray(box.lower), np.asarray(box.upper)
    if np.any(hi <= lo):
        return np.empty((0, region.n)), np.empty(0)
    sampler = qmc.Halton(d=region.n + 1, scramble=True, seed=seed)
    U = qmc.scale(sampler.random(8 * samples), lo, hi)
    inside = region.contains_points(U[:, :-1], U[:, -1])
    a, b = U[inside], U[~inside]
    m = min(a.shape[0], b.shape[0], samples)
    if m == 0:
        return np.empty((0, region.n)), np.empty(0)
    a, b = a[:m].copy(), b[:m].copy()
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (a + b)
        in_mid = region.contains_points(mid[:, :-1], mid[:, -1])
        a[in_mid] = mid[in_mid]
        b[~in_mid] = mid[~in_mid]
    X, T = b[:, :-1], b[:, -1]
    if domain is not None:
        keep = domain.contains_points(X, T)
        X, T = X[keep], T[keep]
    return X, T


def paste_min(
    outer: ScalarField,
    inner: ScalarField,
    region: DomainGeometry,
    domain: DomainGeometry | None = None,
    *,
    samples: int = 1000,
    seed: int = 0,
    rtol: float = 1e-9,
    strict: bool = False,
    step: float | None = None,
    label: str | None = None,
) -> ScalarField:
    """Return w = min{outer, inner} in region, outer elsewhere.

    Derivatives come from the active branch. Within a collar of ∂G of
    width COLLAR_STEPS·step the pasted values are differenced directly.

    Args:
        outer: Field on Θ
        inner: Field on G ⊂ Θ
        region: The region G
        domain: Θ, restricting the continuity check to ∂G ∩ Θ
        samples: Number of interface points checked
        seed: Seed of the interface sampler
        rtol: Relative continuity tolerance
        strict: Raise instead of warning when the check fails
        step: FD step used in the collar
        label: Label of the pasted field

    Returns:
        The pasted field. Its paste_gap attribute holds the largest sampled
        relative jump across ∂G ∩ Θ, or None when no interface point was found.

    Raises:
        PastingError: In strict mode, if the sampled discontinuity exceeds rtol
    """
    if outer.n != inner.n or region.n != outer.n:
        raise ParameterError("outer, inner and region must share the spatial dimension")
    n = outer.n
    collar_step = step if step is not None else 1e-4 * region.bbox.diameter
    collar = COLLAR_STEPS * collar_step

    def active_inner(X, T):
        in_region = region.contains_points(X, T)
        return in_region & (inner.values(X, T) < outer.values(X, T))

    def value(X, T):
        out = outer.values(X, T)
        in_region = region.contains_points(X, T)
        if in_region.any():
            out[in_region] = np.minimum(out[in_region], inner.values(X[in_region], T[in_region]))
        return out

    raw = ScalarField(value, n, domain=domain, label="pasted-raw", step=step)

    def near_interface(X, T):
        base = region.contains_points(X, T)
        near = np.zeros(T.shape, dtype=bool)
        for axis in range(n + 1):
            for sign in (1.0, -1.0):
                Xs, Ts = X.copy(), T.copy()
                if axis == n:
                    Ts = Ts + sign * collar
                else:
                    Xs[:, axis] += sign * collar
                near |= region.contains_points(Xs, Ts) != base
        return near

    def combine(name: str, shape_tail: tuple[int, ...]):
        def derivative(X, T):
            out = np.asarray(getattr(outer, name)(X, T), dtype=float).reshape(
                (X.shape[0], *shape_tail)
            )
            use_inner = active_inner(X, T)
            if use_inner.any():
                out[use_inner] = np.asarray(
                    getattr(inner, name)(X[use_inner], T[use_inner]), dtype=float
                ).reshape((int(use_inner.sum()), *shape_tail))
            near = near_interface(X, T)
            if near.any():
                out[near] = np.asarray(
                    getattr(raw, name)(X[near], T[near], step=collar_step), dtype=float
                ).reshape((int(near.sum()), *shape_tail))
            return out

        return derivative

    pasted = ScalarField(
        value,
        n,
        dt=combine("time_derivative", ()),
        grad=combine("gradient", (n,)),
        hessian=combine("hessian", (n, n)),
        domain=domain,
        label=label or f"min({outer.label},{inner.label})",
        step=step,
    )

    pasted.paste_gap = None
    X, T = interface_points(region, domain, samples=samples, seed=seed)
    if X.shape[0] == 0:
        logger.debug(f"{pasted.label}: no interface points inside the domain")
        return pasted
    u = outer.values(X, T)
    gap = np.abs(np.minimum(u, inner.values(X, T)) - u) / np.maximum(1.0, np.abs(u))
    magnitude = float(np.max(gap))
    pasted.paste_gap = magnitude
    if magnitude > rtol:
        message = (
            f"{pasted.label}: discontinuity {magnitude:.3e} across the region boundary "
            f"({int(np.sum(gap > rtol))}/{gap.size} interface points)"
        )
        if strict:
            raise PastingError(message, magnitude)
        logger.warning(message)
    return pasted
