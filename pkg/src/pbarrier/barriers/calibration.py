"""Calibrated constants of the barrier constructions.

Every record is a frozen pydantic model holding the user-facing parameters;
the derived constants are computed properties so that reports can dump
them next to the inputs.
"""

from __future__ import annotations

import logging
import math
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import optimize

from pbarrier.core.errors import ConvergenceError, ParameterError
from pbarrier.core.models import PParams
from pbarrier.geometry.domains import PETROVSKII_T_MIN, log_weight

logger = logging.getLogger(__name__)

LOG_S_FLOOR = -700.0
GRID_POINTS = 4000
MAX_INDEX_SEARCH = 10**7


def _smallest_index(condition, start: int, what: str) -> int:
    """Smallest integer j >= start with condition(j), by doubling then bisection."""
    if condition(start):
        return start
    hi = max(2 * start, start + 1)
    while not condition(hi):
        if hi > MAX_INDEX_SEARCH:
            raise ParameterError(f"{what}: no admissible index below {MAX_INDEX_SEARCH}")
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if condition(mid):
            hi = mid
        else:
            lo = mid
    return max(hi, start)


# -- exterior ball ---------------------------------------------------------


class ExteriorBallParams(BaseModel):
    """Exterior ball B(ξ₁, R₁) touching Θ at the origin."""

    model_config = ConfigDict(frozen=True)

    p: float = Field(..., gt=1.0)
    n: int = Field(1, ge=1)
    center: tuple[float, ...] = Field(..., min_length=2, description="ξ₁ = (x₁, t₁)")
    radius: float | None = Field(None, gt=0.0, description="R₁; defaults to |ξ₁|")

    @model_validator(mode="after")
    def _check(self) -> ExteriorBallParams:
        if len(self.center) != self.n + 1:
            raise ValueError(f"center must have n+1 = {self.n + 1} coordinates")
        if self.p == 2.0:
            raise ValueError("exterior ball barriers require p != 2")
        if all(c == 0.0 for c in self.center[:-1]):
            raise ValueError("x₁ = 0 puts the origin at a pole of the ball; rejected")
        norm = math.hypot(*self.center)
        if self.radius is not None and not math.isclose(self.radius, norm, rel_tol=1e-12):
            raise ValueError(f"R₁ = {self.radius} must equal |ξ₁| = {norm}")
        return self

    @property
    def R1(self) -> float:
        return self.radius if self.radius is not None else math.hypot(*self.center)

    @property
    def xi2(self) -> np.ndarray:
        return 0.5 * np.asarray(self.center, dtype=float)

    @property
    def R2(self) -> float:
        return 0.5 * self.R1

    @property
    def delta(self) -> float:
        return 0.5 * float(np.linalg.norm(self.xi2[:-1]))

    @property
    def C0(self) -> float:
        if self.p < 2.0:
            return (2.0 * self.R2) ** (self.p - 2.0) * self.delta**2
        return self.delta**self.p

    @property
    def C1(self) -> float:
        return self.R2 / (2.0 ** (self.p - 3.0) * (self.p - 1.0) * self.C0)

    @property
    def j0(self) -> int:
        return max(1, math.ceil((self.n + self.p - 2.0) / ((self.p - 1.0) * self.delta**2)))

    def log_gamma(self, j: int) -> float:
        """log γ(j), kept in log space since γ grows like e^{4jR₂²}."""
        p = self.p
        growth = 1.0 if p < 2.0 else 4.0
        return (math.log(self.C1) + (1.0 - p) * math.log(j)) / (p - 2.0) + growth * j * self.R2**2

    def gamma(self, j: int) -> float:
        return math.exp(self.log_gamma(j))

    def gauge_coefficient(self, j: int) -> float:
        """γ(j)e^{−jR₂²}, the factor in w_j >= γe^{−jR₂²}(1 − e^{−(R²−R₂²)})."""
        return math.exp(self.log_gamma(j) - j * self.R2**2)

    def constants(self) -> dict:
        return {
            "R1": self.R1, "R2": self.R2, "xi2": self.xi2.tolist(), "delta": self.delta,
            "C0": self.C0, "C1": self.C1, "j0": self.j0,
        }


# -- Petrovskii ------------------------------------------------------------


def _log_h(u: np.ndarray, q: float) -> np.ndarray:
    """log of (|u|^q − 1)/q for u = log(−t) < −1."""
    with np.errstate(all="ignore"):
        return np.log((np.abs(u) ** q - 1.0) / q)


def maximize_weight(n: int, lam: float, alpha: float, q: float) -> tuple[float, float]:
    """sup over −1/(2e) < t < 0 of g(t) = (−t)^{n/λ} h(t)^α with h = (|log(−t)|^q − 1)/q.

    The search runs on u = log(−t): a coarse grid brackets the maximum and
    golden-section search refines it.

    Returns:
        (M, t*) with t* the maximizer

    Raises:
        ConvergenceError: If the maximum is not bracketed inside the interval
    """
    u_hi = math.log(-PETROVSKII_T_MIN)

    def neg_log_g(u):
        return -((n / lam) * u + alpha * _log_h(u, q))

    grid = np.linspace(LOG_S_FLOOR, u_hi, GRID_POINTS)
    values = -neg_log_g(grid)
    i = int(np.nanargmax(values))
    if i == 0 or i == grid.size - 1:
        raise ConvergenceError(
            f"maximum of g not bracketed in (−1/(2e), 0): grid maximum at the endpoint u={grid[i]:.3f}",
            history=[float(values[i])],
        )
    u_star = optimize.golden(neg_log_g, brack=(grid[i - 1], grid[i], grid[i + 1]), tol=1e-12)
    M = math.exp(-neg_log_g(u_star))
    return M, -math.exp(u_star)


def stationary_weight(n: int, lam: float, alpha: float, q: float, t_guess: float) -> float:
    """Maximum of g located by Newton iteration on d log g/du = 0, u = log(−t).

    Started away from t_guess; an independent check of maximize_weight.
    """

    def dlog_g(u):
        w = abs(u)
        return n / lam - alpha * q * w ** (q - 1.0) / (w**q - 1.0)

    u_star = optimize.newton(dlog_g, 1.1 * math.log(-t_guess), tol=1e-13, maxiter=100)
    return math.exp((n / lam) * u_star + alpha * float(_log_h(np.asarray(u_star), q)))


class PetrovskiiParams(BaseModel):
    """Constants of the p > 2 family on the Petrovskiĭ-type domain."""

    model_config = ConfigDict(frozen=True)

    p: float = Field(3.0, gt=2.0, description="Exponent, p > 2")
    n: int = Field(1, ge=1)
    alpha: float = Field(1.0, gt=0.0)
    K: float = Field(1.0, gt=0.0)

    @property
    def params(self) -> PParams:
        return PParams(p=self.p, n=self.n)

    @property
    def lam(self) -> float:
        return self.n * (self.p - 2.0) + self.p

    @property
    def q(self) -> float:
        """Exponent (p−1)/(p−2) of F."""
        return (self.p - 1.0) / (self.p - 2.0)

    @property
    def beta(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def kappa(self) -> float:
        return (self.p - 2.0) / (self.p * self.lam ** (1.0 / (self.p - 1.0)))

    @cached_property
    def weight_maximum(self) -> tuple[float, float]:
        return maximize_weight(self.n, self.lam, self.alpha, self.p - 2.0)

    @property
    def M(self) -> float:
        return self.weight_maximum[0]

    @property
    def t_star(self) -> float:
        return self.weight_maximum[1]

    @property
    def M_newton(self) -> float:
        return stationary_weight(self.n, self.lam, self.alpha, self.p - 2.0, self.t_star)

    @property
    def epsilon(self) -> float:
        """ε with (εM)^{p−2} = p/λ."""
        return (self.p / self.lam) ** (1.0 / (self.p - 2.0)) / self.M

    def A(self, j: int) -> float:
        p, n = self.p, self.n
        return n * (p - 2.0) * self.epsilon ** (p - 1.0) * j**self.q / (n * (p - 2.0) ** 2 + p)

    @property
    def L(self) -> float:
        """Constant of the inequality chain bounding the positivity region, valid for j >= 1."""
        p = self.p
        root = p * self.lam ** (1.0 / (p - 1.0))
        return ((p - 1.0) / root) * (1.0 + (p - 2.0) * self.K * self.M ** (p - 2.0) / root) ** (
            1.0 / (p - 2.0)
        )

    @property
    def R(self) -> float:
        """Right-hand constant np(p−2)/([n(p−2)²+p]λM^{p−2})."""
        p, n = self.p, self.n
        return n * p * (p - 2.0) / ((n * (p - 2.0) ** 2 + p) * self.lam * self.M ** (p - 2.0))

    @property
    def j_min(self) -> int:
        """Smallest j >= 1 with L·K/j < R."""
        return max(1, math.floor(self.L * self.K / self.R) + 1)

    def gauge_coefficient(self, j: int) -> float:
        """εj^{(p−1)/(p−2)}(R − LK/j), the lower-bound factor of w_j over the gauge."""
        return self.epsilon * j**self.q * (self.R - self.L * self.K / j)

    def index_for_gauge(self, k: float) -> int:
        return _smallest_index(
            lambda j: self.gauge_coefficient(j) >= k, self.j_min, "petrovskii gauge index"
        )

    def constants(self) -> dict:
        return {
            "lambda": self.lam, "M": self.M, "t_star": self.t_star, "epsilon": self.epsilon,
            "L": self.L, "R": self.R, "j_min": self.j_min,
        }


def petrovskii_width(K: float, alpha: float, p: float, n: int, t: float) -> float:
    """Half-width y(t) of the Petrovskiĭ domain, by bracketing the defining equation.

    Solves (y/(−t)^{1/λ})^{p/(p−1)} = K(−t)^{n(p−2)/λ}h(t)^{α(p−2)} for y.
    """
    if p <= 2.0:
        raise ParameterError(f"petrovskii_width requires p > 2, got p={p}")
    if not PETROVSKII_T_MIN < t < 0.0:
        raise ParameterError(f"t must lie in (−1/(2e), 0), got {t}")
    lam = n * (p - 2.0) + p
    beta = p / (p - 1.0)
    s = -t
    rhs = K * s ** (n * (p - 2.0) / lam) * float(log_weight(t, p - 2.0)) ** (alpha * (p - 2.0))

    def defect(y):
        return (y / s ** (1.0 / lam)) ** beta - rhs

    upper = s ** (1.0 / lam)
    while defect(upper) < 0:
        upper *= 2.0
    return float(optimize.brentq(defect, 0.0, upper, xtol=1e-15, rtol=1e-13))


# -- singular final point ----------------------------------------------------


class SingularFinalParams(BaseModel):
    """Constants of the 1 < p < 2 family on {|x|^l < K(−t)}."""

    model_config = ConfigDict(frozen=True)

    p: float = Field(1.5, gt=1.0, lt=2.0)
    n: int = Field(1, ge=1)
    l: float = Field(1.0, gt=0.0)  # noqa: E741
    K: float = Field(2.0, gt=1.0)
    alpha: float | None = Field(None, description="Defaults to the midpoint of the admissible window")

    @model_validator(mode="after")
    def _check(self) -> SingularFinalParams:
        if not self.l < self.p:
            raise ValueError(f"empty α window: need l < p, got l={self.l}, p={self.p}")
        lo, hi = self.alpha_window
        if self.alpha is not None and not lo < self.alpha < hi:
            raise ValueError(f"α={self.alpha} outside the admissible window ({lo}, {hi})")
        return self

    @property
    def params(self) -> PParams:
        return PParams(p=self.p, n=self.n)

    @property
    def alpha_window(self) -> tuple[float, float]:
        p, l = self.p, self.l  # noqa: E741
        return 1.0 + (1.0 + 0.5 * l) / (2.0 - p), 2.0 / (2.0 - p) + 0.5

    @property
    def alpha_value(self) -> float:
        if self.alpha is not None:
            return self.alpha
        lo, hi = self.alpha_window
        return 0.5 * (lo + hi)

    def radius(self, j: int) -> float:
        """Radius ½√((2−p)/j) of G^j."""
        return 0.5 * math.sqrt((2.0 - self.p) / j)

    def m(self, j: int) -> float:
        p, l, K = self.p, self.l, self.K  # noqa: E741
        base = (0.5 * math.sqrt(2.0 - p)) ** l / K
        exponent = self.alpha_value - 1.0 - (1.0 + 0.5 * l) / (2.0 - p)
        return 0.75 * (2.0 - p) * base ** (1.0 / (2.0 - p)) * j**exponent

    def lower_coefficient(self, j: int) -> float:
        """c_j with u_j >= c_j(−t)^{1/(2−p)} on G^j."""
        p = self.p
        return 0.75 * (2.0 - p) * j ** (self.alpha_value - 1.0 - 1.0 / (2.0 - p))

    def operator_bound_holds(self, j: int) -> bool:
        """2(n+p−2)(2−p)^{−(1−p/2)} j^{α(p−1)+1−p/2} >= j^{α−2}."""
        p, n, a = self.p, self.n, self.alpha_value
        lhs = 2.0 * (n + p - 2.0) * (2.0 - p) ** (-(1.0 - 0.5 * p)) * j ** (a * (p - 1.0) + 1.0 - 0.5 * p)
        return lhs >= j ** (a - 2.0)

    @property
    def j_min(self) -> int:
        return _smallest_index(self.operator_bound_holds, 2, "singular_final j_min")

    def index_for_gauge(self, k: float) -> int:
        return _smallest_index(
            lambda j: min(self.lower_coefficient(j), self.m(j)) >= k,
            self.j_min,
            "singular_final gauge index",
        )

    def constants(self) -> dict:
        lo, hi = self.alpha_window
        return {"alpha": self.alpha_value, "alpha_window": [lo, hi], "j_min": self.j_min}
