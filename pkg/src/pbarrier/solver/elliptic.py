"""The auxiliary one-dimensional elliptic problem and its travelling transform.

On Ω = (−r₀, 0) ∪ (0, r₀) solve

    Δ_p u = θ·min{ζu′, 0} − j,    u = j|x| on ∂Ω,

by damped Newton on the conservative difference system, then move the
profile with the boundary point: v(x, t) = u(x − η(−t)ζ) − j·t. For
0 <= η′ <= θ, v is p-superparabolic on the sheared slit domain.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import spsolve

from pbarrier.core.errors import ConvergenceError, ParameterError
from pbarrier.core.fields import ScalarField
from pbarrier.core.models import PParams
from pbarrier.geometry.domains import BoundingBox, DomainGeometry
from pbarrier.solver.scheme import FluxScheme

logger = logging.getLogger(__name__)

MIN_DAMPING = 2.0**-12


def _residual(u: np.ndarray, scheme: FluxScheme, theta: float, zeta: int, j: float):
    """Residual of the difference system at the interior nodes and its Jacobian diagonals."""
    h = scheme.h
    D = np.diff(u) / h
    F = scheme.flux(D)
    dF = scheme.flux_derivative(D)
    interior = slice(1, -1)
    # upwind difference for ζu′, monotone in the neighbours
    s = (u[interior] - u[:-2]) / h if zeta == 1 else (u[interior] - u[2:]) / h
    G = (F[1:] - F[:-1]) / h - theta * np.minimum(s, 0.0) + j

    lower = dF[:-1] / h**2
    upper = dF[1:] / h**2
    main = -(dF[1:] + dF[:-1]) / h**2
    downwind = s < 0
    main = main - theta * downwind / h
    if zeta == 1:
        lower = lower + theta * downwind / h
    else:
        upper = upper + theta * downwind / h
    return G, lower, main, upper


def _newton(
    u: np.ndarray,
    scheme: FluxScheme,
    theta: float,
    zeta: int,
    j: float,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, list[float]]:
    history: list[float] = []
    G, lower, main, upper = _residual(u, scheme, theta, zeta, j)
    norm = float(np.max(np.abs(G))) if G.size else 0.0
    history.append(norm)
    target = tol * max(1.0, abs(j))
    for _ in range(max_iter):
        if norm <= target:
            return u, history
        J = sparse.diags([lower[1:], main, upper[:-1]], [-1, 0, 1], format="csc")
        step = spsolve(J, -G)
        damping = 1.0
        while True:
            trial = u.copy()
            trial[1:-1] += damping * step
            G_t, lower_t, main_t, upper_t = _residual(trial, scheme, theta, zeta, j)
            norm_t = float(np.max(np.abs(G_t)))
            if norm_t < (1.0 - 1e-4 * damping) * norm or damping <= MIN_DAMPING:
                break
            damping *= 0.5
        u, G, lower, main, upper, norm = trial, G_t, lower_t, main_t, upper_t, norm_t
        history.append(norm)
        logger.debug(f"Newton: |G| = {norm:.3e} (damping {damping:g})")
    if norm <= target:
        return u, history
    raise ConvergenceError(
        f"Newton did not reach |G| <= {target:.1e} in {max_iter} iterations (last {norm:.3e})",
        history,
    )


@dataclass
class EllipticSolution:
    """Nodal solution on both sides of the slit with cubic-spline profiles."""

    params: PParams
    theta: float
    zeta: int
    j: float
    r0: float
    h: float
    delta: float
    nodes: list[np.ndarray]
    values: list[np.ndarray]
    history: list[list[float]]
    _splines: list[CubicSpline] = field(init=False, repr=False)

    def __post_init__(self):
        self._splines = [CubicSpline(x, u) for x, u in zip(self.nodes, self.values)]

    def _piecewise(self, y, order: int) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        out = np.full(y.shape, np.nan)
        left = (y > -self.r0) & (y < 0)
        right = (y > 0) & (y < self.r0)
        for sel, spline in zip((left, right), self._splines):
            if sel.any():
                out[sel] = spline(y[sel], order)
        return out

    def u(self, y) -> np.ndarray:
        """The profile u_j; NaN outside Ω."""
        return self._piecewise(y, 0)

    def du(self, y) -> np.ndarray:
        return self._piecewise(y, 1)

    def d2u(self, y) -> np.ndarray:
        """u″ from the equation itself: (θ min{ζu′,0} − j)/((p−1)|u′|^{p−2}).

        Falls back to the spline where that quotient is not finite.
        """
        p = self.params.p
        du = self.du(y)
        with np.errstate(all="ignore"):
            out = (self.theta * np.minimum(self.zeta * du, 0.0) - self.j) / (
                (p - 1.0) * np.abs(du) ** (p - 2.0)
            )
        bad = ~np.isfinite(out) & np.isfinite(du)
        if bad.any():
            out[bad] = self._piecewise(np.asarray(y, dtype=float)[bad], 2)
        return out

    def lower_bound_holds(self, tol: float = 1e-10) -> bool:
        """u_j >= j|x| at every node."""
        return all(
            bool(np.all(u >= self.j * np.abs(x) - tol * max(1.0, self.j)))
            for x, u in zip(self.nodes, self.values)
        )

    def _eta(self, eta, eta_prime):
        if eta is None:
            rate = 0.5 * self.theta
            return (lambda s: rate * s), (lambda s: np.full(np.shape(s), rate))
        if eta_prime is None:
            raise ParameterError("eta_prime is required together with eta")
        return eta, eta_prime

    def transformed_domain(
        self,
        T: float = 1.0,
        eta: Callable | None = None,
        eta_prime: Callable | None = None,
    ) -> DomainGeometry:
        """{(x, t): −T < t < 0, x − η(−t)ζ ∈ Ω}."""
        eta, _ = self._eta(eta, eta_prime)
        s = np.linspace(0.0, T, 257)
        reach = float(np.max(np.abs(eta(s))))

        def predicate(X, T_):
            y = X[:, 0] - eta(-T_) * self.zeta
            return (T_ > -T) & (T_ < 0) & (np.abs(y) < self.r0) & (y != 0)

        bbox = BoundingBox(lower=(-self.r0 - reach, -T), upper=(self.r0 + reach, 0.0))
        return DomainGeometry.from_predicate(
            predicate, bbox, label=f"sheared_slit[theta={self.theta:g},zeta={self.zeta}]",
            params={"r0": self.r0, "T": T, "zeta": self.zeta},
        )

    def transform(
        self,
        eta: Callable | None = None,
        eta_prime: Callable | None = None,
        T: float = 1.0,
    ) -> ScalarField:
        """v_j(x, t) = u_j(x − η(−t)ζ) − j·t with closed-form derivatives.

        Args:
            eta: s ↦ η(s) with η(0) = 0; θs/2 by default
            eta_prime: s ↦ η′(s), required when eta is given
            T: Time depth of the transformed domain

        Raises:
            ParameterError: If η′ leaves [0, θ] on (0, T), or a != 1
        """
        if self.params.a != 1.0:
            raise ParameterError("the travelling transform is a supersolution only for a = 1")
        eta, eta_prime = self._eta(eta, eta_prime)
        s = np.linspace(0.0, T, 257)
        rates = np.asarray(eta_prime(s), dtype=float)
        if np.any(rates < 0) or np.any(rates > self.theta * (1.0 + 1e-12)):
            raise ParameterError(f"eta' must stay in [0, theta={self.theta:g}] on (0, {T:g})")
        zeta, j = self.zeta, self.j

        def shift(X, T_):
            return X[:, 0] - eta(-T_) * zeta

        return ScalarField(
            lambda X, T_: self.u(shift(X, T_)) - j * T_,
            1,
            dt=lambda X, T_: zeta * eta_prime(-T_) * self.du(shift(X, T_)) - j,
            grad=lambda X, T_: self.du(shift(X, T_))[:, None],
            hessian=lambda X, T_: self.d2u(shift(X, T_))[:, None, None],
            domain=self.transformed_domain(T, eta, eta_prime),
            label=f"v[j={j:g}]",
        )


def solve_elliptic_aux_1d(
    params: PParams,
    theta: float,
    zeta: int,
    j: float,
    r0: float = 1.0,
    h: float = 1.0 / 200,
    *,
    tol: float = 1e-10,
    max_iter: int = 100,
    delta_scale: float = 1.0,
) -> EllipticSolution:
    """Solve Δ_p u = θ min{ζu′, 0} − j on (−r₀, 0) ∪ (0, r₀) with u = j|x| on the boundary.

    Args:
        params: Equation parameters, n = 1
        theta: Drift bound θ > 0
        zeta: Direction ±1
        j: Index, >= 0
        r0: Half-width of Ω
        h: Grid spacing; must divide r0
        tol: Newton tolerance on max |G| relative to max(1, j)
        max_iter: Newton iteration cap
        delta_scale: Flux regularisation δ = h·delta_scale

    Raises:
        ParameterError: On n != 1, θ <= 0, ζ not ±1, j < 0 or h not dividing r0
        ConvergenceError: If Newton stalls; carries the residual history
    """
    if params.n != 1:
        raise ParameterError(f"the auxiliary elliptic problem is solved for n = 1 only, got n={params.n}")
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    if zeta not in (1, -1):
        raise ParameterError(f"zeta must be +1 or -1, got {zeta}")
    if j < 0:
        raise ParameterError(f"j must be nonnegative, got {j}")
    cells = round(r0 / h)
    if cells < 2 or abs(cells * h - r0) > 1e-9 * r0:
        raise ParameterError(f"h={h} does not divide r0={r0}")
    scheme = FluxScheme.for_grid(params, h, delta_scale)

    nodes, values, histories = [], [], []
    for lo, hi in ((-r0, 0.0), (0.0, r0)):
        x = np.linspace(lo, hi, cells + 1)
        u0 = j * np.abs(x)
        u, history = _newton(u0, scheme, theta, zeta, j, tol, max_iter)
        nodes.append(x)
        values.append(u)
        histories.append(history)
    logger.info(
        f"Elliptic auxiliary problem p={params.p}, theta={theta}, zeta={zeta}, j={j}: "
        f"{len(histories[0]) - 1}+{len(histories[1]) - 1} Newton steps"
    )
    return EllipticSolution(
        params=params,
        theta=theta,
        zeta=zeta,
        j=float(j),
        r0=r0,
        h=h,
        delta=scheme.delta,
        nodes=nodes,
        values=values,
        history=histories,
    )
