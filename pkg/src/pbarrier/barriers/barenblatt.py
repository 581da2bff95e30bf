"""The Barenblatt source-type solution.

    B(x,t) = t^{−n/λ} (C − ((p−2)/p) λ^{1/(1−p)} (|x|/t^{1/λ})^{p/(p−1)})₊^{(p−1)/(p−2)}

defined for t > 0, p != 2 and λ = n(p−2)+p > 0. For p > 2 it has compact
support; for 2n/(n+1) < p < 2 the bracket is always positive.
"""

from __future__ import annotations

import numpy as np

from pbarrier.core.errors import ParameterError
from pbarrier.core.fields import ScalarField, as_points
from pbarrier.core.models import PParams
from pbarrier.geometry.domains import BoundingBox, DomainGeometry


def _check(params: PParams, C: float) -> None:
    params.requires_p_not_two("the Barenblatt solution")
    if params.lambda_() <= 0:
        raise ParameterError(
            f"the Barenblatt solution needs λ = n(p-2)+p > 0, i.e. p > 2n/(n+1); got p={params.p}"
        )
    if C <= 0:
        raise ParameterError(f"profile constant C must be positive, got {C}")


def _kappa(params: PParams) -> float:
    p, lam = params.p, params.lambda_()
    return (p - 2.0) / p * lam ** (1.0 / (1.0 - p))


def _profile(params: PParams, C: float, X: np.ndarray, T: np.ndarray):
    if np.any(T <= 0):
        raise ParameterError("the Barenblatt solution is defined for t > 0 only")
    p, n, lam = params.p, params.n, params.lambda_()
    beta = p / (p - 1.0)
    q = (p - 1.0) / (p - 2.0)
    r = np.sqrt(np.sum(X**2, axis=1))
    G = C - _kappa(params) * (r * T ** (-1.0 / lam)) ** beta
    support = G > 0
    return p, n, lam, beta, q, r, G, support


def barenblatt(params: PParams, C: float, x, t):
    """B_p(x, t) at a point or at arrays of points.

    Raises:
        ParameterError: For t <= 0, p = 2, λ <= 0 or C <= 0
    """
    _check(params, C)
    X, T, single = as_points(x, t, params.n)
    p, n, lam, beta, q, r, G, support = _profile(params, C, X, T)
    out = np.zeros_like(T)
    out[support] = T[support] ** (-n / lam) * G[support] ** q
    return float(out[0]) if single else out


def barenblatt_field(params: PParams, C: float = 1.0) -> ScalarField:
    """B_p as a ScalarField with closed-form derivatives (zero outside the support)."""
    _check(params, C)
    kappa = _kappa(params)
    n = params.n

    def parts(X, T):
        p, n_, lam, beta, q, r, G, support = _profile(params, C, X, T)
        Gs = np.where(support, G, 1.0)
        nz = r > 0
        # ∇G = −κβ t^{−β/λ} r^{β−2} x
        scale = np.zeros_like(r)
        scale[nz] = -kappa * beta * T[nz] ** (-beta / lam) * r[nz] ** (beta - 2.0)
        gradG = scale[:, None] * X
        unit = np.zeros_like(X)
        unit[nz] = X[nz] / r[nz, None]
        hessG = scale[:, None, None] * (
            np.eye(n)[None] + (beta - 2.0) * np.einsum("ni,nj->nij", unit, unit)
        )
        amp = T ** (-n / lam)
        return lam, beta, q, r, Gs, support, gradG, hessG, amp

    def value(X, T):
        return barenblatt(params, C, X, T)

    def dt(X, T):
        lam, beta, q, r, G, support, _, _, amp = parts(X, T)
        dG = kappa * beta / lam * (r * T ** (-1.0 / lam)) ** beta / T
        out = -(n / lam) * amp * G**q / T + amp * q * G ** (q - 1.0) * dG
        return np.where(support, out, 0.0)

    def grad(X, T):
        lam, beta, q, r, G, support, gradG, _, amp = parts(X, T)
        out = (amp * q * G ** (q - 1.0))[:, None] * gradG
        return np.where(support[:, None], out, 0.0)

    def hessian(X, T):
        lam, beta, q, r, G, support, gradG, hessG, amp = parts(X, T)
        out = (amp * q)[:, None, None] * (
            ((q - 1.0) * G ** (q - 2.0))[:, None, None] * np.einsum("ni,nj->nij", gradG, gradG)
            + (G ** (q - 1.0))[:, None, None] * hessG
        )
        return np.where(support[:, None, None], out, 0.0)

    return ScalarField(
        value, n, dt=dt, grad=grad, hessian=hessian, label=f"barenblatt[p={params.p:g},C={C:g}]"
    )


def barenblatt_support_radius(params: PParams, C: float, t: float) -> float:
    """Radius of the support of B_p(·, t) for p > 2."""
    if params.p <= 2.0:
        raise ParameterError("the Barenblatt profile has compact support only for p > 2")
    lam = params.lambda_()
    beta = params.p / (params.p - 1.0)
    return t ** (1.0 / lam) * (C / _kappa(params)) ** (1.0 / beta)


def barenblatt_support(
    params: PParams, C: float, t1: float, t2: float, shrink: float = 0.9
) -> DomainGeometry:
    """{|x| < shrink·r(t), t1 < t < t2}: a space-time region strictly inside the support.

    For p < 2 the support is all of space and the spatial radius is taken
    as r(t) = t^{1/λ}.
    """
    _check(params, C)
    if not 0 < t1 < t2:
        raise ParameterError(f"need 0 < t1 < t2, got ({t1}, {t2})")
    lam = params.lambda_()
    n = params.n

    def radius(T):
        if params.p > 2.0:
            return shrink * np.asarray(T, dtype=float) ** (1.0 / lam) * (
                C / _kappa(params)
            ) ** ((params.p - 1.0) / params.p)
        return shrink * np.asarray(T, dtype=float) ** (1.0 / lam)

    def predicate(X, T):
        return np.sqrt(np.sum(X**2, axis=1)) < radius(T)

    y = float(max(radius(t1), radius(t2)))
    bbox = BoundingBox(lower=(-y,) * n + (t1,), upper=(y,) * n + (t2,))
    return DomainGeometry.from_predicate(
        predicate, bbox, label="barenblatt_support", params={"C": C, "t1": t1, "t2": t2}
    )
