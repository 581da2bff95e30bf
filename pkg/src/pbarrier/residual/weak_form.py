"""Weak-form residual against a compactly supported test bump.

For a box Q = Π(lo_i, hi_i) in space-time the functional

    ∬_Q |∇u|^{p−2}∇u·∇φ − a·u ∂ₜφ dx dt

vanishes for weak solutions and is nonnegative for weak supersolutions
tested with φ >= 0. It is evaluated with tensor-product Gauss–Legendre
quadrature.
"""

from __future__ import annotations

import itertools
import logging
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from pbarrier.core.errors import ParameterError
from pbarrier.core.fields import ScalarField
from pbarrier.core.models import PParams
from pbarrier.geometry.domains import BoundingBox

logger = logging.getLogger(__name__)


class MollifierBump:
    """φ(y) = Π_i exp(−1/(1−s_i²)), s_i the coordinate rescaled to (−1, 1) on the box."""

    def __init__(self, box: BoundingBox):
        self.lower = np.asarray(box.lower, dtype=float)
        self.upper = np.asarray(box.upper, dtype=float)
        self.half = 0.5 * (self.upper - self.lower)
        self.mid = 0.5 * (self.upper + self.lower)

    def _s(self, Y: np.ndarray) -> np.ndarray:
        return (Y - self.mid) / self.half

    def value(self, Y: np.ndarray) -> np.ndarray:
        s = self._s(Y)
        inside = np.all(np.abs(s) < 1.0, axis=1)
        out = np.zeros(Y.shape[0])
        si = s[inside]
        out[inside] = np.exp(-np.sum(1.0 / (1.0 - si**2), axis=1))
        return out

    def gradient(self, Y: np.ndarray) -> np.ndarray:
        """Space-time gradient, shape (N, n+1)."""
        s = self._s(Y)
        phi = self.value(Y)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_deriv = -2.0 * s / (1.0 - s**2) ** 2 / self.half
        return np.where(phi[:, None] > 0, phi[:, None] * log_deriv, 0.0)


def _nodes(box: BoundingBox, order: int) -> tuple[np.ndarray, np.ndarray]:
    base, weights = leggauss(order)
    lo = np.asarray(box.lower, dtype=float)
    hi = np.asarray(box.upper, dtype=float)
    axes = [0.5 * (h - l) * base + 0.5 * (h + l) for l, h in zip(lo, hi)]  # noqa: E741
    axis_w = [0.5 * (h - l) * weights for l, h in zip(lo, hi)]  # noqa: E741
    Y = np.array(list(itertools.product(*axes)))
    W = np.prod(np.array(list(itertools.product(*axis_w))), axis=1)
    return Y, W


def weak_form_check(
    field: ScalarField,
    params: PParams,
    box: BoundingBox | tuple,
    order: int = 24,
    test_bump: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None,
    closed_form: bool = True,
) -> float:
    """Evaluate the weak-form functional of field on box.

    Args:
        field: Field u
        params: Equation parameters
        box: BoundingBox, or (lower, upper) with time as the last coordinate
        order: Gauss–Legendre nodes per axis
        test_bump: Callable Y -> (φ, ∇φ) with Y of shape (N, n+1); the
            standard mollifier of the box when omitted
        closed_form: Use closed-form gradients when present

    Returns:
        The quadrature value
    """
    if not isinstance(box, BoundingBox):
        lower, upper = box
        box = BoundingBox(lower=tuple(lower), upper=tuple(upper))
    if box.n != field.n:
        raise ParameterError(f"box has {box.n} spatial axes, field has {field.n}")
    if order < 2:
        raise ParameterError(f"quadrature order must be >= 2, got {order}")

    Y, W = _nodes(box, order)
    if test_bump is None:
        bump = MollifierBump(box)
        dphi = bump.gradient(Y)
    else:
        _, dphi = test_bump(Y)
    X, T = Y[:, :-1], Y[:, -1]
    u = field.values(X, T)
    grad = np.asarray(field.gradient(X, T, closed_form=closed_form)).reshape(X.shape)
    g = np.sqrt(np.sum(grad**2, axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(g > 0, g ** (params.p - 2.0), 0.0)
    flux = weight[:, None] * grad
    integrand = np.sum(flux * dphi[:, :-1], axis=1) - params.a * u * dphi[:, -1]
    value = float(np.sum(W * integrand))
    logger.debug(f"Weak form of {field.label} on {box.lower}..{box.upper} at order {order}: {value:.3e}")
    return value
