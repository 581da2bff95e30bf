"""The p-Laplacian and the parabolic residual a·∂ₜu − Δ_p u.

Δ_p u is evaluated from first and second derivatives through the
non-divergence expansion

    Δ_p u = |∇u|^{p−2} [Δu + (p−2)⟨D²u ∇u, ∇u⟩ / |∇u|²].

Below the gradient floor the expansion is undefined. For p > 2 it is
extended by zero; for p < 2 the point is flagged degenerate. A point where
the Hessian is also below the floor is locally constant and has Δ_p u = 0
for every p.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from pbarrier.core.errors import DegenerateGradientError, NonFiniteError
from pbarrier.core.fields import ScalarField, as_points
from pbarrier.core.models import PParams

logger = logging.getLogger(__name__)

DEGENERATE_FLOOR = 1e-10


@dataclass
class OperatorValues:
    """Vectorised operator evaluation at N points."""

    dt: np.ndarray
    p_laplacian: np.ndarray
    residual: np.ndarray
    degenerate: np.ndarray
    scale: np.ndarray


def p_laplacian_from_derivatives(
    grad: np.ndarray,
    hess: np.ndarray,
    p: float,
    floor: float = DEGENERATE_FLOOR,
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate Δ_p from gradients (N, n) and Hessians (N, n, n).

    Returns:
        (values, degenerate) where degenerate marks p < 2 points below the floor
    """
    g2 = np.sum(grad**2, axis=1)
    g = np.sqrt(g2)
    lap = np.trace(hess, axis1=1, axis2=2)
    values = np.zeros_like(g)
    degenerate = np.zeros(g.shape, dtype=bool)
    if p == 2.0:
        return lap.copy(), degenerate

    flat = g < floor
    regular = ~flat
    if regular.any():
        quad = np.einsum("ni,nij,nj->n", grad[regular], hess[regular], grad[regular])
        values[regular] = g[regular] ** (p - 2.0) * (
            lap[regular] + (p - 2.0) * quad / g2[regular]
        )
    if p < 2.0 and flat.any():
        curved = flat & (np.max(np.abs(hess.reshape(hess.shape[0], -1)), axis=1) >= floor)
        values[curved] = np.nan
        degenerate[curved] = True
    return values, degenerate


def evaluate_operator(
    field: ScalarField,
    params: PParams,
    X: np.ndarray,
    T: np.ndarray,
    step: float | None = None,
    closed_form: bool = True,
    floor: float = DEGENERATE_FLOOR,
) -> OperatorValues:
    """Evaluate ∂ₜu, Δ_p u and the residual at the points (X, T)."""
    dt = np.atleast_1d(field.time_derivative(X, T, step=step, closed_form=closed_form))
    grad = field.gradient(X, T, step=step, closed_form=closed_form).reshape(X.shape)
    hess = field.hessian(X, T, step=step, closed_form=closed_form).reshape(
        X.shape[0], X.shape[1], X.shape[1]
    )
    plap, degenerate = p_laplacian_from_derivatives(grad, hess, params.p, floor)
    residual = params.a * dt - plap
    scale = np.maximum(1.0, np.abs(params.a * dt) + np.abs(np.nan_to_num(plap)))
    return OperatorValues(dt, plap, residual, degenerate, scale)


def _check_finite(values: np.ndarray, degenerate: np.ndarray, what: str, X, T) -> None:
    bad = ~np.isfinite(values) & ~degenerate
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise NonFiniteError(f"non-finite {what} at x={X[i].tolist()}, t={T[i]}")


def p_laplacian_at(
    field: ScalarField,
    params: PParams,
    x,
    t,
    step: float | None = None,
    *,
    closed_form: bool = True,
    floor: float = DEGENERATE_FLOOR,
):
    """Δ_p u at a point (or at arrays of points).

    Uses the field's closed-form derivatives when present, otherwise central
    finite differences with the given step.

    Raises:
        DegenerateGradientError: For a single point with p < 2 and |∇u| < floor
        NonFiniteError: If a derivative is not finite
    """
    X, T, single = as_points(x, t, field.n)
    ops = evaluate_operator(field, params, X, T, step, closed_form, floor)
    _check_finite(ops.p_laplacian, ops.degenerate, "p-Laplacian", X, T)
    if single:
        if ops.degenerate[0]:
            raise DegenerateGradientError(
                f"|grad u| < {floor:g} at x={X[0].tolist()}, t={T[0]} with p={params.p} < 2"
            )
        return float(ops.p_laplacian[0])
    return ops.p_laplacian


def residual_at(
    field: ScalarField,
    params: PParams,
    x,
    t,
    step: float | None = None,
    *,
    closed_form: bool = True,
    floor: float = DEGENERATE_FLOOR,
):
    """a·∂ₜu − Δ_p u; nonnegative exactly for classical supersolutions."""
    X, T, single = as_points(x, t, field.n)
    ops = evaluate_operator(field, params, X, T, step, closed_form, floor)
    _check_finite(ops.residual, ops.degenerate, "residual", X, T)
    if single:
        if ops.degenerate[0]:
            raise DegenerateGradientError(
                f"|grad u| < {floor:g} at x={X[0].tolist()}, t={T[0]} with p={params.p} < 2"
            )
        return float(ops.residual[0])
    return ops.residual
