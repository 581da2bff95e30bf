"""The single barrier of the singular supercritical range 2n/(n+1) < p < 2.

For j large the function below is one barrier on the Petrovskiĭ-type
domain with exponent 2−p, but it tends to 0 as j → ∞, so the members
never grow away from the origin and no barrier family results. It is kept
as a ScalarField (values only, finite-difference derivatives) together
with helpers that show the decay and certify the supersolution sign.
"""

from __future__ import annotations

import logging

import numpy as np

from pbarrier.barriers.calibration import maximize_weight
from pbarrier.core.errors import ParameterError
from pbarrier.core.fields import ScalarField
from pbarrier.core.models import PParams
from pbarrier.geometry.domains import SingularSupercriticalSpec, make_domain
from pbarrier.residual.certify import CertReport, certify
from pbarrier.residual.operators import DEGENERATE_FLOOR

logger = logging.getLogger(__name__)


def singular_supercritical_barrier(
    spec: SingularSupercriticalSpec, j: float, epsilon: float = 1.0
) -> ScalarField:
    """The singular-range single barrier w at index j.

    w = −εh̃^α[j − κ̃z^β]^{−(p−1)/(2−p)} + εj^{−(p−1)/(2−p)}h̃^α
        + (n(2−p)εj^{−(p−1)/(2−p)}/(λM^{2−p})) (−t)^{n(2−p)/λ} h̃^{α(3−p)}

    with h̃ = (|log(−t)|^{2−p} − 1)/(2−p), κ̃ = (2−p)/(pλ^{1/(p−1)}) and
    z = |x|/(−t)^{1/λ}.
    """
    domain = make_domain(spec)
    p, n, alpha = spec.p, spec.n, spec.alpha
    if j <= 0 or epsilon <= 0:
        raise ParameterError("j and epsilon must be positive")
    lam = n * (p - 2.0) + p
    beta = p / (p - 1.0)
    e = (p - 1.0) / (2.0 - p)
    kappa = (2.0 - p) / (p * lam ** (1.0 / (p - 1.0)))
    M, _ = maximize_weight(n, lam, alpha, 2.0 - p)
    tail = n * (2.0 - p) * epsilon * j ** (-e) / (lam * M ** (2.0 - p))

    def value(X, T):
        s = -T
        h = (np.abs(np.log(s)) ** (2.0 - p) - 1.0) / (2.0 - p)
        z = np.sqrt(np.sum(X**2, axis=1)) / s ** (1.0 / lam)
        bracket = j - kappa * z**beta
        return (
            -epsilon * h**alpha * bracket ** (-e)
            + epsilon * j ** (-e) * h**alpha
            + tail * s ** (n * (2.0 - p) / lam) * h ** (alpha * (3.0 - p))
        )

    return ScalarField(
        value, n, domain=domain, label=f"singular_supercritical[j={j:g}]"
    )


def exhibit_decay(
    spec: SingularSupercriticalSpec,
    j_values: list[float],
    X: np.ndarray,
    T: np.ndarray,
    epsilon: float = 1.0,
) -> list[float]:
    """max |w_j| over the given points for each j; decreases toward 0 as j grows."""
    out = []
    for j in j_values:
        w = singular_supercritical_barrier(spec, j, epsilon)
        out.append(float(np.max(np.abs(w.values(X, T)))))
    logger.info(f"Singular supercritical decay over j={list(j_values)}: {out}")
    return out


def exhibit_floor(spec: SingularSupercriticalSpec, j: float) -> float:
    """Degenerate floor scaled like ∇w, which carries the factor j^{−(p−1)/(2−p)−1}."""
    e = (spec.p - 1.0) / (2.0 - spec.p)
    return DEGENERATE_FLOOR * j ** -(e + 1.0)


def exhibit_residual(
    spec: SingularSupercriticalSpec,
    j: float,
    samples: int = 2_000,
    seed: int = 0,
    tol: float = 1e-8,
    *,
    epsilon: float = 1.0,
    floor: float | None = None,
) -> CertReport:
    """Certify w_j as a supersolution on its own domain.

    Derivatives are finite differences. With the unscaled floor most samples
    of a large-j member fall below it and are excluded; the report carries
    that count and fraction either way.

    Args:
        spec: Exhibit parameters
        j: Member index
        samples: Number of low-discrepancy samples
        seed: Sampling seed
        tol: Absolute residual tolerance
        epsilon: Amplitude ε of the member
        floor: Degenerate-gradient floor; exhibit_floor(spec, j) when None
    """
    w = singular_supercritical_barrier(spec, j, epsilon)
    report = certify(
        w,
        PParams(p=spec.p, n=spec.n),
        w.domain,
        samples,
        seed,
        tol,
        sense="super",
        floor=exhibit_floor(spec, j) if floor is None else floor,
        closed_form=False,
    )
    logger.info(
        f"{w.label}: {report.violations} violations, "
        f"{report.excluded_fraction:.2%} excluded as degenerate"
    )
    return report
