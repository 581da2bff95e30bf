"""Space-time scalar fields with optional closed-form derivatives.

Every field is vectorised: callables take x of shape (N, n) and t of shape
(N,) and return arrays of shape (N,), (N, n) or (N, n, n). Single points
are accepted everywhere and give scalar-shaped results.

Missing derivatives are synthesised by finite differences. Central
stencils are used by default; when the field carries a domain and a
central stencil would leave it, a second-order one-sided stencil is used
instead.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Callable

import numpy as np

from pbarrier.core.errors import NonFiniteError, ParameterError

if TYPE_CHECKING:
    from pbarrier.geometry.domains import DomainGeometry

logger = logging.getLogger(__name__)

ValueFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

MIN_FD_STEP = 1e-5
REL_FD_STEP = 1e-5


def as_points(x, t, n: int) -> tuple[np.ndarray, np.ndarray, bool]:
    """Normalise (x, t) to arrays of shape (N, n) and (N,).

    Returns:
        (X, T, single) where single is True when a lone point was given
    """
    t_arr = np.asarray(t, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if t_arr.ndim == 0:
        return x_arr.reshape(1, n), t_arr.reshape(1), True
    T = t_arr.ravel()
    return x_arr.reshape(T.size, n), T, False


def _squeeze(values: np.ndarray, single: bool):
    return values[0] if single else values


def default_step(X: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Per-coordinate FD steps max(1e-5, 1e-5·|coordinate|), shape (N, n+1)."""
    coords = np.column_stack([X, T])
    return np.maximum(MIN_FD_STEP, REL_FD_STEP * np.abs(coords))


class ScalarField:
    """A space-time function u(x, t) with an optional derivative bundle."""

    def __init__(
        self,
        value: ValueFn,
        n: int,
        *,
        dt: ValueFn | None = None,
        grad: ValueFn | None = None,
        hessian: ValueFn | None = None,
        domain: DomainGeometry | None = None,
        label: str = "field",
        step: float | None = None,
        residual: ValueFn | None = None,
    ):
        """Create a field.

        Args:
            value: u(X, T) -> (N,)
            n: Spatial dimension
            dt: Closed-form ∂ₜu, optional
            grad: Closed-form ∇u (N, n), optional
            hessian: Closed-form D²u (N, n, n), optional
            domain: Domain of validity, used for one-sided stencils
            label: Descriptive tag used in reports
            step: Fixed FD step overriding the default rule
            residual: Closed-form residual a·∂ₜu − Δ_p u, optional
        """
        if n < 1:
            raise ParameterError(f"spatial dimension must be >= 1, got {n}")
        self._value = value
        self._dt = dt
        self._grad = grad
        self._hessian = hessian
        self.n = n
        self.domain = domain
        self.label = label
        self.step = step
        self.residual_closed_form = residual

    def __repr__(self) -> str:
        return f"ScalarField(label={self.label!r}, n={self.n}, closed_form={self.has_closed_form})"

    @property
    def has_closed_form(self) -> bool:
        return all(f is not None for f in (self._dt, self._grad, self._hessian))

    def __call__(self, x, t):
        X, T, single = as_points(x, t, self.n)
        return _squeeze(np.asarray(self._value(X, T), dtype=float), single)

    def values(self, X: np.ndarray, T: np.ndarray) -> np.ndarray:
        return np.asarray(self._value(X, T), dtype=float)

    # -- derivatives -----------------------------------------------------

    def time_derivative(self, x, t, step: float | None = None, closed_form: bool = True):
        X, T, single = as_points(x, t, self.n)
        if closed_form and self._dt is not None:
            out = np.asarray(self._dt(X, T), dtype=float)
        else:
            out = self._fd_first(X, T, self.n, step)
        return _squeeze(out, single)

    def gradient(self, x, t, step: float | None = None, closed_form: bool = True):
        X, T, single = as_points(x, t, self.n)
        if closed_form and self._grad is not None:
            out = np.asarray(self._grad(X, T), dtype=float).reshape(X.shape)
        else:
            out = np.column_stack([self._fd_first(X, T, i, step) for i in range(self.n)])
        return _squeeze(out, single)

    def hessian(self, x, t, step: float | None = None, closed_form: bool = True):
        X, T, single = as_points(x, t, self.n)
        if closed_form and self._hessian is not None:
            out = np.asarray(self._hessian(X, T), dtype=float).reshape(X.shape[0], self.n, self.n)
        else:
            out = self._fd_hessian(X, T, step)
        return _squeeze(out, single)

    # -- finite differences ----------------------------------------------

    def _steps(self, X: np.ndarray, T: np.ndarray, axis: int, step: float | None) -> np.ndarray:
        if step is not None:
            return np.full(X.shape[0], float(step))
        if self.step is not None:
            return np.full(X.shape[0], float(self.step))
        return default_step(X, T)[:, axis]

    def _shift(self, X, T, axis: int, delta: np.ndarray):
        if axis == self.n:
            return X, T + delta
        Xs = X.copy()
        Xs[:, axis] += delta
        return Xs, T

    def _eval_shift(self, X, T, axis, delta):
        Xs, Ts = self._shift(X, T, axis, delta)
        return self.values(Xs, Ts)

    def _inside(self, X, T, axis, delta) -> np.ndarray:
        if self.domain is None:
            return np.ones(X.shape[0], dtype=bool)
        Xs, Ts = self._shift(X, T, axis, delta)
        return self.domain.contains_points(Xs, Ts)

    def _fd_first(self, X, T, axis: int, step: float | None) -> np.ndarray:
        """First derivative along axis (axis == n means time)."""
        h = self._steps(X, T, axis, step)
        fp = self._eval_shift(X, T, axis, h)
        fm = self._eval_shift(X, T, axis, -h)
        out = (fp - fm) / (2.0 * h)
        if self.domain is None:
            return out
        plus_ok = self._inside(X, T, axis, h)
        minus_ok = self._inside(X, T, axis, -h)
        forward = plus_ok & ~minus_ok
        backward = minus_ok & ~plus_ok
        if forward.any():
            f0 = self.values(X[forward], T[forward])
            f2 = self._eval_shift(X[forward], T[forward], axis, 2 * h[forward])
            out[forward] = (-3.0 * f0 + 4.0 * fp[forward] - f2) / (2.0 * h[forward])
        if backward.any():
            f0 = self.values(X[backward], T[backward])
            f2 = self._eval_shift(X[backward], T[backward], axis, -2 * h[backward])
            out[backward] = (3.0 * f0 - 4.0 * fm[backward] + f2) / (2.0 * h[backward])
        return out

    def _fd_hessian(self, X, T, step: float | None) -> np.ndarray:
        N, n = X.shape
        H = np.empty((N, n, n))
        f0 = self.values(X, T)
        for i in range(n):
            hi = self._steps(X, T, i, step)
            fp = self._eval_shift(X, T, i, hi)
            fm = self._eval_shift(X, T, i, -hi)
            d2 = (fp - 2.0 * f0 + fm) / hi**2
            if self.domain is not None:
                plus_ok = self._inside(X, T, i, hi)
                minus_ok = self._inside(X, T, i, -hi)
                for mask, sign in ((plus_ok & ~minus_ok, 1.0), (minus_ok & ~plus_ok, -1.0)):
                    if mask.any():
                        Xm, Tm, hm = X[mask], T[mask], sign * hi[mask]
                        f1 = self._eval_shift(Xm, Tm, i, hm)
                        f2 = self._eval_shift(Xm, Tm, i, 2 * hm)
                        f3 = self._eval_shift(Xm, Tm, i, 3 * hm)
                        d2[mask] = (2.0 * f0[mask] - 5.0 * f1 + 4.0 * f2 - f3) / hm**2
            H[:, i, i] = d2
            for j in range(i + 1, n):
                hj = self._steps(X, T, j, step)
                Xpp = X.copy()
                Xpp[:, i] += hi
                Xpp[:, j] += hj
                Xpm = X.copy()
                Xpm[:, i] += hi
                Xpm[:, j] -= hj
                Xmp = X.copy()
                Xmp[:, i] -= hi
                Xmp[:, j] += hj
                Xmm = X.copy()
                Xmm[:, i] -= hi
                Xmm[:, j] -= hj
                mixed = (
                    self.values(Xpp, T) - self.values(Xpm, T)
                    - self.values(Xmp, T) + self.values(Xmm, T)
                ) / (4.0 * hi * hj)
                H[:, i, j] = mixed
                H[:, j, i] = mixed
        return H

    # -- combinators -----------------------------------------------------

    def scaled(self, factor: float, label: str | None = None) -> ScalarField:
        """Return factor·u with the derivative bundle scaled alongside."""

        def scale(fn):
            if fn is None:
                return None
            return lambda X, T: factor * np.asarray(fn(X, T), dtype=float)

        return ScalarField(
            scale(self._value),
            self.n,
            dt=scale(self._dt),
            grad=scale(self._grad),
            hessian=scale(self._hessian),
            domain=self.domain,
            label=label or f"{factor:g}*{self.label}",
            step=self.step,
        )

    def without_closed_form(self) -> ScalarField:
        return ScalarField(
            self._value, self.n, domain=self.domain, label=f"{self.label}[fd]", step=self.step
        )


def field_from_closure(
    value_fn: ValueFn,
    n: int,
    *,
    dt: ValueFn | None = None,
    grad: ValueFn | None = None,
    hessian: ValueFn | None = None,
    step: float | None = None,
    domain: DomainGeometry | None = None,
    probe_points: tuple[np.ndarray, np.ndarray] | None = None,
    label: str = "closure",
) -> ScalarField:
    """Wrap a vectorised closure as a ScalarField.

    Args:
        value_fn: u(X, T) for X of shape (N, n), T of shape (N,)
        n: Spatial dimension
        dt, grad, hessian: Optional closed-form derivatives
        step: Fixed FD step for synthesised derivatives
        domain: Domain of validity
        probe_points: (X, T) at which value_fn must be finite
        label: Descriptive tag

    Returns:
        The wrapped field

    Raises:
        NonFiniteError: If value_fn is not finite at a probe point
    """
    field = ScalarField(
        value_fn, n, dt=dt, grad=grad, hessian=hessian, domain=domain, label=label, step=step
    )
    if probe_points is not None:
        X, T, _ = as_points(*probe_points, n)
        values = field.values(X, T)
        bad = ~np.isfinite(values)
        if bad.any():
            idx = int(np.flatnonzero(bad)[0])
            raise NonFiniteError(
                f"{label}: non-finite value {values[idx]} at x={X[idx].tolist()}, t={T[idx]}"
            )
    logger.debug(f"Built field {label} (closed form: {field.has_closed_form})")
    return field


def constant_field(c: float, n: int, label: str | None = None) -> ScalarField:
    """A constant field with exact (zero) derivatives."""
    return ScalarField(
        lambda X, T: np.full(T.shape, float(c)),
        n,
        dt=lambda X, T: np.zeros(T.shape),
        grad=lambda X, T: np.zeros(X.shape),
        hessian=lambda X, T: np.zeros((X.shape[0], X.shape[1], X.shape[1])),
        label=label or f"const({c:g})",
    )
