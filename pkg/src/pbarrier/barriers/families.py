"""Closed-form barrier families.

Each constructor returns a BarrierFamily whose members carry exact
derivative bundles (pasted members switch between the bundles of their
branches). The constructors validate the parameter ranges of the
underlying construction and raise ParameterError otherwise.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from pbarrier.barriers.calibration import (
    ExteriorBallParams,
    PetrovskiiParams,
    SingularFinalParams,
    _smallest_index,
)
from pbarrier.barriers.pasting import paste_min
from pbarrier.core.errors import ParameterError
from pbarrier.core.family import BarrierFamily
from pbarrier.core.fields import ScalarField, constant_field
from pbarrier.core.models import PParams, SpaceTimePoint
from pbarrier.geometry.domains import (
    BallComplementSpec,
    BoundingBox,
    BoxSpec,
    Cone1dSpec,
    DomainGeometry,
    NorthPoleSpec,
    PetrovskiiSpec,
    SingularFinalSpec,
    make_domain,
)

logger = logging.getLogger(__name__)


def _radial(Y: np.ndarray, beta: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """r^β together with its gradient and Hessian, r = |Y|; derivatives are 0 at Y = 0."""
    r = np.sqrt(np.sum(Y**2, axis=1))
    nz = r > 0
    value = np.zeros_like(r)
    value[nz] = r[nz] ** beta
    scale = np.zeros_like(r)
    scale[nz] = beta * r[nz] ** (beta - 2.0)
    grad = scale[:, None] * Y
    unit = np.zeros_like(Y)
    unit[nz] = Y[nz] / r[nz, None]
    n = Y.shape[1]
    outer = np.einsum("ni,nj->nij", unit, unit)
    hess = scale[:, None, None] * (np.eye(n)[None] + (beta - 2.0) * outer)
    return value, grad, hess


def _ball_region(radius: float, n: int, t1: float, t2: float, label: str) -> DomainGeometry:
    """{|x| < radius} × (t1, t2)."""

    def predicate(X, T):
        return np.sum(X**2, axis=1) < radius**2

    bbox = BoundingBox(lower=(-radius,) * n + (t1,), upper=(radius,) * n + (t2,))
    return DomainGeometry.from_predicate(predicate, bbox, label=label)


# -- ψ_j minorants -------------------------------------------------------------


def make_psi_family(
    params: PParams,
    diam_theta: float,
    xi0: SpaceTimePoint | None = None,
    domain: DomainGeometry | None = None,
) -> BarrierFamily:
    """ψ_j(x,t) = j((p−1)/p)|x−x₀|^{p/(p−1)} + j^{p−1}(n/(2·diam))(t−t₀)².

    ψ_j is p-subparabolic wherever t − t₀ <= diam; the attached closed-form
    residual is j^{p−1}n((t−t₀)/diam − 1).

    Args:
        params: Equation parameters
        diam_theta: Diameter of the domain, > 0
        xi0: Base point, the origin by default
        domain: Claimed domain; a box of diameter diam_theta starting at t₀ by default
    """
    if diam_theta <= 0:
        raise ParameterError(f"diam_theta must be positive, got {diam_theta}")
    p, n = params.p, params.n
    xi0 = xi0 or SpaceTimePoint.origin(n)
    xi0.check_dimension(params)
    x0, t0 = xi0.as_arrays()
    beta = p / (p - 1.0)
    c = (p - 1.0) / p
    coef_t = n / (2.0 * diam_theta)

    if domain is None:
        side = diam_theta / math.sqrt(n + 1.0)
        domain = make_domain(
            BoxSpec(
                lower=list(x0 - 0.5 * side), upper=list(x0 + 0.5 * side), t1=t0, t2=t0 + side
            )
        )

    def member(j: int) -> ScalarField:
        jt = float(j) ** (p - 1.0)

        def parts(X):
            return _radial(X - x0, beta)

        def residual(X, T):
            return jt * n * ((T - t0) / diam_theta - 1.0)

        return ScalarField(
            lambda X, T: j * c * parts(X)[0] + jt * coef_t * (T - t0) ** 2,
            n,
            dt=lambda X, T: 2.0 * jt * coef_t * (T - t0),
            grad=lambda X, T: j * c * parts(X)[1],
            hessian=lambda X, T: j * c * parts(X)[2],
            domain=domain,
            label=f"psi[j={j}]",
            residual=residual,
        )

    def gauge(X, T):
        return c * _radial(X - x0, beta)[0] + coef_t * (T - t0) ** 2

    exponent = max(1.0, 1.0 / (p - 1.0))
    return BarrierFamily(
        "psi",
        params,
        member,
        gauge,
        1,
        domain,
        xi0,
        sense="sub",
        index_for_gauge=lambda k: max(1, math.ceil(k**exponent - 1e-12)),
        constants={"diam_theta": diam_theta, "x0": x0.tolist(), "t0": t0},
    )


# -- exterior ball ---------------------------------------------------------------


def make_exterior_ball_family(params: PParams, ball: ExteriorBallParams) -> BarrierFamily:
    """w_j = γ(j)(e^{−jR₂²} − e^{−jR²}), R = |ξ − ξ₂|, on Θ₀ = Θ ∩ B(0, δ).

    Θ is the complement of the closed ball B(ξ₁, R₁) whose sphere passes
    through the origin.
    """
    params.requires_p_not_two("exterior ball family")
    if ball.p != params.p or ball.n != params.n:
        raise ParameterError("ball parameters and equation parameters disagree on p or n")
    n = params.n
    xi2 = ball.xi2
    R2 = ball.R2
    delta = ball.delta
    origin = SpaceTimePoint.origin(n)
    outer = make_domain(
        BallComplementSpec(
            center=list(ball.center),
            radius=ball.R1,
            box_lower=[-delta] * (n + 1),
            box_upper=[delta] * (n + 1),
        )
    )
    domain = outer.restrict_to_ball(origin, delta)

    def offsets(X, T):
        Y = np.column_stack([X, T]) - xi2
        return Y, np.sum(Y**2, axis=1)

    def member(j: int) -> ScalarField:
        log_g = ball.log_gamma(j)

        def value(X, T):
            _, R_sq = offsets(X, T)
            # γe^{−jR₂²}(1 − e^{−j(R²−R₂²)})
            return np.exp(log_g - j * R2**2) * -np.expm1(-j * (R_sq - R2**2))

        def weight(X, T):
            Y, R_sq = offsets(X, T)
            return Y, 2.0 * j * np.exp(log_g - j * R_sq)

        def dt(X, T):
            Y, w = weight(X, T)
            return w * Y[:, -1]

        def grad(X, T):
            Y, w = weight(X, T)
            return w[:, None] * Y[:, :-1]

        def hessian(X, T):
            Y, w = weight(X, T)
            Z = Y[:, :-1]
            return w[:, None, None] * (
                np.eye(n)[None] - 2.0 * j * np.einsum("ni,nj->nij", Z, Z)
            )

        return ScalarField(
            value, n, dt=dt, grad=grad, hessian=hessian, domain=domain,
            label=f"exterior_ball[j={j}]",
        )

    def gauge(X, T):
        _, R_sq = offsets(X, T)
        return -np.expm1(-(R_sq - R2**2))

    j0 = ball.j0
    return BarrierFamily(
        "exterior_ball",
        params,
        member,
        gauge,
        j0,
        domain,
        origin,
        calibration=lambda j: {"gamma": ball.gamma(j), "log_gamma": ball.log_gamma(j)},
        index_for_gauge=lambda k: _smallest_index(
            lambda j: ball.gauge_coefficient(j) >= k, max(j0, 1), "exterior_ball gauge index"
        ),
        constants=ball.constants(),
    )


# -- north pole ------------------------------------------------------------------


def north_pole_m(params: PParams, theta: float, l: float, k: float, j: int) -> float:  # noqa: E741
    """m_j = j^{1−p/((p−1)k)}(p−1)/p − nθj^{p−1−l/k}."""
    p, n = params.p, params.n
    return j ** (1.0 - p / ((p - 1.0) * k)) * (p - 1.0) / p - n * theta * j ** (p - 1.0 - l / k)


def make_north_pole_family(
    params: PParams,
    theta: float,
    l: float,  # noqa: E741
    k: float,
    radius: float = 1.0,
) -> BarrierFamily:
    """h_j = min{f_j, m_j} on G^j, m_j elsewhere, for Θ = {t > −θ|x|^l, −1 < t < 0}.

    f_j(x,t) = j((p−1)/p)|x|^{p/(p−1)} + nj^{p−1}t is p-parabolic everywhere;
    G^j = {|x| < j^{−1/k}, −θj^{−l/k} < t < 0}.
    """
    p, n = params.p, params.n
    beta = p / (p - 1.0)
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    if p < 2.0 and l < beta:
        raise ParameterError(f"north_pole with p < 2 requires l >= p/(p-1) = {beta:g}, got l={l}")
    if p > 2.0 and l <= p:
        raise ParameterError(f"north_pole with p > 2 requires l > p, got l={l}")
    if k <= beta:
        raise ParameterError(f"north_pole requires k > p/(p-1) = {beta:g}, got k={k}")
    if l <= beta + k * (p - 2.0):
        raise ParameterError(
            f"m_j does not diverge: need l > p/(p-1) + k(p-2) = {beta + k * (p - 2.0):g}; "
            "choose k closer to p/(p-1)"
        )
    c = (p - 1.0) / p
    exponent = p - 2.0 - (l - beta) / k
    positivity = c / (2.0 * n * theta)
    domain = make_domain(NorthPoleSpec(theta=theta, l=l, n=n, radius=radius))
    origin = SpaceTimePoint.origin(n)

    def m(j: int) -> float:
        return north_pole_m(params, theta, l, k, j)

    def admissible(j: int) -> bool:
        return j**exponent <= positivity and m(j) > 0

    j_min = _smallest_index(admissible, 1, "north_pole j_min")

    def f(j: int) -> ScalarField:
        jt = float(j) ** (p - 1.0)
        return ScalarField(
            lambda X, T: j * c * _radial(X, beta)[0] + n * jt * T,
            n,
            dt=lambda X, T: np.full(T.shape, n * jt),
            grad=lambda X, T: j * c * _radial(X, beta)[1],
            hessian=lambda X, T: j * c * _radial(X, beta)[2],
            label=f"f[j={j}]",
        )

    def member(j: int) -> ScalarField:
        size = j ** (-1.0 / k)
        region = _ball_region(size, n, -theta * j ** (-l / k), 0.0, f"G[j={j}]")
        return paste_min(
            constant_field(m(j), n, label=f"m[j={j}]"),
            f(j),
            region,
            domain,
            label=f"north_pole[j={j}]",
        )

    def gauge(X, T):
        return np.minimum(1.0, 0.5 * c * _radial(X, beta)[0])

    return BarrierFamily(
        "north_pole",
        params,
        member,
        gauge,
        j_min,
        domain,
        origin,
        calibration=lambda j: {"m_j": m(j), "G_radius": j ** (-1.0 / k)},
        index_for_gauge=lambda kk: _smallest_index(
            lambda j: m(j) >= kk, max(j_min, math.ceil(kk)), "north_pole gauge index"
        ),
        constants={"theta": theta, "l": l, "k": k, "radius": radius},
    )


# -- 1+1 cone ----------------------------------------------------------------------


def cone_mu0(p: float, gamma: float) -> float:
    """μ₀ = e^{1+γ}/(γ^p(p−1))^{1/(p−2)}, the smallest admissible μ for p > 2."""
    return math.exp(1.0 + gamma) / (gamma**p * (p - 1.0)) ** (1.0 / (p - 2.0))


def cone_alpha(p: float, gamma: float, j: float) -> float:
    """α(j) = (j^{2−p}/(γ^p(p−1)))^{1/(p−1)} for 1 < p < 2."""
    return (j ** (2.0 - p) / (gamma**p * (p - 1.0))) ** (1.0 / (p - 1.0))


def make_cone1d_family(
    params: PParams,
    gamma: float,
    orientation: str = "horizontal",
    radius: float = 1.0,
) -> BarrierFamily:
    """u_{μ,α}(x,t) = μ(1 − e^{−α s}) with s = |t| − γx (horizontal) or |t| + γ|x| (downward).

    The horizontal family lives on the complement of the cone {|t| < 2γx}.
    The factor 2 keeps the zero set {|t| = γx} of every member outside the
    closure of that complement except at ξ₀, where the closures meet; on
    {|t| < γx} itself the members would vanish along the whole boundary.
    The downward family lives on the complement of {|x| <= γ|t|}, whose two
    components each satisfy a horizontal cone condition.
    """
    if params.n != 1:
        raise ParameterError(f"cone1d family requires n = 1, got n={params.n}")
    params.requires_p_not_two("cone1d family")
    if gamma <= 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    if orientation not in ("horizontal", "downward"):
        raise ParameterError(f"orientation must be 'horizontal' or 'downward', got {orientation!r}")
    p = params.p
    horizontal = orientation == "horizontal"
    domain = make_domain(
        Cone1dSpec(
            gamma=2.0 * gamma if horizontal else gamma, orientation=orientation, radius=radius
        )
    )

    def s_of(X, T):
        x = X[:, 0]
        if horizontal:
            return np.abs(T) - gamma * x, -gamma * np.ones_like(x)
        return np.abs(T) + gamma * np.abs(x), gamma * np.sign(x)

    if p > 2.0:
        mu0 = cone_mu0(p, gamma)
        j_min = max(1, math.ceil(mu0))

        def alpha_of(j):
            return 1.0

        constants = {"gamma": gamma, "orientation": orientation, "mu0": mu0}
    else:
        j_min = max(1, math.ceil((gamma**p * (p - 1.0)) ** (1.0 / (2.0 - p)) - 1e-12))
        while cone_alpha(p, gamma, j_min) < 1.0:
            j_min += 1

        def alpha_of(j):
            return cone_alpha(p, gamma, j)

        constants = {"gamma": gamma, "orientation": orientation}

    def member(j: int) -> ScalarField:
        mu = float(j)
        a = alpha_of(j)

        def value(X, T):
            s, _ = s_of(X, T)
            return -mu * np.expm1(-a * s)

        def dt(X, T):
            s, _ = s_of(X, T)
            # ∂ₜ|t| = −1 for t < 0
            return -mu * a * np.exp(-a * s)

        def grad(X, T):
            s, ds = s_of(X, T)
            return (mu * a * ds * np.exp(-a * s))[:, None]

        def hessian(X, T):
            s, ds = s_of(X, T)
            return (-mu * a**2 * ds**2 * np.exp(-a * s))[:, None, None]

        return ScalarField(
            value, 1, dt=dt, grad=grad, hessian=hessian, domain=domain,
            label=f"cone1d[{orientation},j={j}]",
        )

    def gauge(X, T):
        s, _ = s_of(X, T)
        return -np.expm1(-s)

    return BarrierFamily(
        "cone1d",
        params,
        member,
        gauge,
        j_min,
        domain,
        SpaceTimePoint.origin(1),
        calibration=lambda j: {"mu": float(j), "alpha": alpha_of(j)},
        constants=constants,
    )


# -- Petrovskii ----------------------------------------------------------------------


def make_petrovskii_family(pp: PetrovskiiParams) -> BarrierFamily:
    """w_j = f(t)F^{(p−1)/(p−2)} − j^{(p−1)/(p−2)}f(t) + ρ_j(t) on the Petrovskiĭ domain.

    f = −εh^α, F = j + κ(|x|/(−t)^{1/λ})^{p/(p−1)}, ρ_j = A(j)(−t)^{1−p/λ}h^{α(p−1)}.
    """
    params = pp.params
    p, n, alpha = pp.p, pp.n, pp.alpha
    lam, q, beta, kappa = pp.lam, pp.q, pp.beta, pp.kappa
    eps = pp.epsilon
    domain = make_domain(PetrovskiiSpec(K=pp.K, alpha=alpha, p=p, n=n))
    logger.info(
        f"Petrovskii calibration: M={pp.M:.10g}, epsilon={eps:.10g}, L={pp.L:.6g}, "
        f"R={pp.R:.6g}, j_min={pp.j_min}"
    )

    def time_parts(T):
        s = -T
        Lg = -np.log(s)
        h = (Lg ** (p - 2.0) - 1.0) / (p - 2.0)
        dh = Lg ** (p - 3.0) / s
        return s, h, dh

    def member(j: int) -> ScalarField:
        A = pp.A(j)
        jq = float(j) ** q

        def pieces(X, T):
            s, h, dh = time_parts(T)
            rb, grad_rb, hess_rb = _radial(X, beta)
            damp = s ** (-beta / lam)
            F = j + kappa * rb * damp
            f = -eps * h**alpha
            return s, h, dh, F, f, damp, grad_rb, hess_rb

        def rho(s, h):
            return A * s ** (1.0 - p / lam) * h ** (alpha * (p - 1.0))

        def value(X, T):
            s, h, _, F, f, *_ = pieces(X, T)
            return f * (F**q - jq) + rho(s, h)

        def dt(X, T):
            s, h, dh, F, f, *_ = pieces(X, T)
            df = -eps * alpha * h ** (alpha - 1.0) * dh
            dF = (beta / lam) * (F - j) / s
            drho = (
                -A * (1.0 - p / lam) * s ** (-p / lam) * h ** (alpha * (p - 1.0))
                + A * alpha * (p - 1.0) * s ** (1.0 - p / lam) * h ** (alpha * (p - 1.0) - 1.0) * dh
            )
            return df * (F**q - jq) + f * q * F ** (q - 1.0) * dF + drho

        def grad(X, T):
            _, _, _, F, f, damp, grad_rb, _ = pieces(X, T)
            return (f * q * F ** (q - 1.0) * kappa * damp)[:, None] * grad_rb

        def hessian(X, T):
            _, _, _, F, f, damp, grad_rb, hess_rb = pieces(X, T)
            gF = (kappa * damp)[:, None] * grad_rb
            HF = (kappa * damp)[:, None, None] * hess_rb
            return (f * q)[:, None, None] * (
                ((q - 1.0) * F ** (q - 2.0))[:, None, None] * np.einsum("ni,nj->nij", gF, gF)
                + (F ** (q - 1.0))[:, None, None] * HF
            )

        return ScalarField(
            value, n, dt=dt, grad=grad, hessian=hessian, domain=domain,
            label=f"petrovskii[j={j}]",
        )

    def gauge(X, T):
        s, h, _ = time_parts(T)
        return s ** (n * (p - 2.0) / lam) * h ** (alpha * (p - 1.0))

    return BarrierFamily(
        "petrovskii",
        params,
        member,
        gauge,
        pp.j_min,
        domain,
        SpaceTimePoint.origin(n),
        calibration=lambda j: {"A": pp.A(j), "gauge_coefficient": pp.gauge_coefficient(j)},
        index_for_gauge=pp.index_for_gauge,
        constants={**pp.constants(), "K": pp.K, "alpha": alpha},
    )


def petrovskii_rho(pp: PetrovskiiParams, j: int, t):
    """ρ_j(t), the upper bound of w_j at time t."""
    s = -np.asarray(t, dtype=float)
    h = (np.abs(np.log(s)) ** (pp.p - 2.0) - 1.0) / (pp.p - 2.0)
    return pp.A(j) * s ** (1.0 - pp.p / pp.lam) * h ** (pp.alpha * (pp.p - 1.0))


def petrovskii_positivity_holds(pp: PetrovskiiParams, j: int, X: np.ndarray, T: np.ndarray) -> np.ndarray:
    """F^{(p−1)/(p−2)} < j^{(p−1)/(p−2)} − ρ/f at the given points."""
    s = -T
    h = (np.abs(np.log(s)) ** (pp.p - 2.0) - 1.0) / (pp.p - 2.0)
    f = -pp.epsilon * h**pp.alpha
    F = j + pp.kappa * (np.sqrt(np.sum(X**2, axis=1)) / s ** (1.0 / pp.lam)) ** pp.beta
    return F**pp.q < float(j) ** pp.q - petrovskii_rho(pp, j, T) / f


# -- singular final point ----------------------------------------------------------------


def make_singular_final_family(sp: SingularFinalParams) -> BarrierFamily:
    """w_j = min{u_j, m_j} on G^j ∩ Θ, m_j elsewhere, for Θ = {|x|^l < K(−t), −1 < t < 0}.

    u_j(x,t) = j^α(−t/j)^{1/(2−p)}((2−p)/j − |x|²), G^j = {|x| < ½√((2−p)/j)}.
    """
    params = sp.params
    p, n = sp.p, sp.n
    a = sp.alpha_value
    e = 1.0 / (2.0 - p)
    domain = make_domain(SingularFinalSpec(K=sp.K, l=sp.l, p=p, n=n))

    def u(j: int) -> ScalarField:
        ja = float(j) ** a

        def P(T):
            return (-T / j) ** e

        def Q(X):
            return (2.0 - p) / j - np.sum(X**2, axis=1)

        return ScalarField(
            lambda X, T: ja * P(T) * Q(X),
            n,
            dt=lambda X, T: -(ja / j) * e * (-T / j) ** (e - 1.0) * Q(X),
            grad=lambda X, T: (-2.0 * ja * P(T))[:, None] * X,
            hessian=lambda X, T: (-2.0 * ja * P(T))[:, None, None] * np.eye(n)[None],
            label=f"u[j={j}]",
        )

    def member(j: int) -> ScalarField:
        region = _ball_region(sp.radius(j), n, -1.0, 0.0, f"G[j={j}]")
        return paste_min(
            constant_field(sp.m(j), n, label=f"m[j={j}]"),
            u(j),
            region,
            domain,
            label=f"singular_final[j={j}]",
        )

    def gauge(X, T):
        return (-T) ** e

    return BarrierFamily(
        "singular_final",
        params,
        member,
        gauge,
        sp.j_min,
        domain,
        SpaceTimePoint.origin(n),
        calibration=lambda j: {
            "m_j": sp.m(j), "lower_coefficient": sp.lower_coefficient(j), "G_radius": sp.radius(j)
        },
        index_for_gauge=sp.index_for_gauge,
        constants={**sp.constants(), "K": sp.K, "l": sp.l},
    )
