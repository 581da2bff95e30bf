"""Executable barrier-family conditions.

Checks a family member against the conditions that make it a barrier
family on its domain, at sampled points:

1. Positivity: w_j > 0 in Θ (>= 0 for minorant and solution families)
2. Vanishing limit: max w_j over B(ξ₀, r) ∩ Θ shrinks with r
3. Gauge bound: w_{j(k)} >= k·d for k in GAUGE_LEVELS
4. Calibration: the constants used to build w_j satisfy their defining relations
"""

from __future__ import annotations

import json
import logging
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel
from scipy.stats import qmc

from pbarrier.core.family import BarrierFamily
from pbarrier.core.models import SpaceTimePoint
from pbarrier.geometry.domains import DomainGeometry
from pbarrier.geometry.sampling import sample_domain, sample_near

logger = logging.getLogger(__name__)

GAUGE_LEVELS = (1, 2, 4, 8)
LIMIT_RADII = (2.0**-10, 2.0**-20, 2.0**-40)
LIMIT_FRACTION = 1e-3
CUSP_ORDERS = (2, 4, 8)


class ValidationResult(BaseModel):
    """Result of a single family check."""

    check_name: str
    status: str  # "PASS", "WARN", or "FAIL"
    message: str
    details: dict[str, Any] | None = None


class ValidationReport(BaseModel):
    """All checks run against one family member."""

    family: str
    j: int
    timestamp: str
    checks: list[ValidationResult]
    overall_status: str  # "PASS", "WARN", or "FAIL"


def _points_near(
    domain: DomainGeometry, center: SpaceTimePoint, radius: float, count: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Domain points within radius of center, including thin cusps.

    Falls back to boxes whose time side shrinks like radius^m when plain
    rejection finds too few points (domains pinched in time near center).
    """
    X, T = sample_near(domain, center, radius, count, seed=seed)
    if X.shape[0] >= max(1, count // 10):
        return X, T
    xc, tc = np.asarray(center.x, dtype=float), float(center.t)
    kept_X, kept_T = [X], [T]
    for m in CUSP_ORDERS:
        U = qmc.Halton(d=domain.n + 1, scramble=True, seed=seed + m).random(max(256, count))
        Xs = xc + radius * (2.0 * U[:, :-1] - 1.0)
        Ts = tc + radius**m * (2.0 * U[:, -1] - 1.0)
        keep = domain.contains_points(Xs, Ts) & (
            np.sum((Xs - xc) ** 2, axis=1) + (Ts - tc) ** 2 < radius**2
        )
        kept_X.append(Xs[keep])
        kept_T.append(Ts[keep])
    return np.concatenate(kept_X), np.concatenate(kept_T)


def _finite_constants(data: dict[str, Any]) -> list[str]:
    bad = []
    for key, value in data.items():
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            if not math.isfinite(value):
                bad.append(key)
    return bad


def _calibration_relations(family: BarrierFamily, j: int) -> dict[str, bool]:
    """Defining relations of the family-specific constants."""
    c = family.calibration(j)
    p, lam = family.params.p, family.params.lambda_()
    relations: dict[str, bool] = {}
    if family.name == "petrovskii":
        relations["(eps*M)^(p-2) = p/lambda"] = math.isclose(
            (c["epsilon"] * c["M"]) ** (p - 2.0), p / lam, rel_tol=1e-9
        )
        relations["j_min*R > L*K"] = c["j_min"] * c["R"] > c["L"] * c["K"]
    elif family.name == "exterior_ball":
        relations["gamma(j) > 0"] = c["gamma"] > 0
    elif family.name == "north_pole":
        relations["m_j > 0"] = c["m_j"] > 0
    elif family.name == "cone1d":
        if p > 2.0:
            relations["mu >= mu0"] = c["mu"] >= c["mu0"]
        else:
            relations["alpha(j) >= 1"] = c["alpha"] >= 1.0
    elif family.name == "singular_final":
        lo, hi = c["alpha_window"]
        relations["alpha inside window"] = lo < c["alpha"] < hi
        relations["m_j > 0"] = c["m_j"] > 0
    return relations


def validate_family(
    family: BarrierFamily,
    j: int | None = None,
    samples: int = 2000,
    seed: int = 0,
    output_dir: str | Path | None = None,
) -> ValidationReport:
    """Run the family conditions against w_j (j_min by default).

    Args:
        family: The family to check
        j: Member index; family.j_min when None
        samples: Sample count for each sampled check
        seed: Seed of the domain sampler
        output_dir: Optional directory to save the report JSON

    Returns:
        ValidationReport with all check results
    """
    j = family.j_min if j is None else int(j)
    w = family.member(j)
    X, T = sample_domain(family.domain, samples, seed=seed)
    checks: list[ValidationResult] = []

    # Check 1: Positivity
    values = w.values(X, T) if X.shape[0] else np.empty(0)
    strict = family.sense == "super"
    bad = (values <= 0) if strict else (values < 0)
    bad |= ~np.isfinite(values)
    details = {"samples": int(values.size), "violations": int(bad.sum())}
    if values.size == 0:
        checks.append(ValidationResult(
            check_name="positivity",
            status="WARN",
            message=f"No sample points in {family.domain.label}",
            details=details,
        ))
    elif bad.any():
        checks.append(ValidationResult(
            check_name="positivity",
            status="FAIL",
            message=f"w_{j} is not {'positive' if strict else 'nonnegative'} at {int(bad.sum())} points",
            details={**details, "min_value": float(np.nanmin(values))},
        ))
    else:
        checks.append(ValidationResult(
            check_name="positivity",
            status="PASS",
            message=f"w_{j} {'>' if strict else '>='} 0 at all {values.size} points",
            details={**details, "min_value": float(values.min())},
        ))

    if family.sense != "solution":
        # Check 2: Vanishing limit at ξ₀ over dyadic balls
        scale = float(np.max(np.abs(values))) if values.size else 1.0
        scale = max(scale, 1e-300)
        diameter = family.domain.bbox.diameter
        maxima = []
        for m, r in enumerate(LIMIT_RADII):
            Xr, Tr = _points_near(family.domain, family.xi0, r * diameter, samples, seed + m)
            maxima.append(float(np.max(w.values(Xr, Tr))) if Xr.shape[0] else float("nan"))
        found = [v for v in maxima if math.isfinite(v)]
        decreasing = len(found) == len(maxima) and all(
            b <= a for a, b in zip(maxima, maxima[1:])
        )
        details = {"radii": [r * diameter for r in LIMIT_RADII], "maxima": maxima, "scale": scale}
        if not decreasing:
            checks.append(ValidationResult(
                check_name="vanishing_limit",
                status="FAIL",
                message="max of w_j over shrinking balls does not decrease",
                details=details,
            ))
        elif maxima[-1] < LIMIT_FRACTION * scale:
            checks.append(ValidationResult(
                check_name="vanishing_limit",
                status="PASS",
                message=f"max over the smallest ball is {maxima[-1] / scale:.2e} of the family scale",
                details=details,
            ))
        else:
            checks.append(ValidationResult(
                check_name="vanishing_limit",
                status="WARN",
                message=(
                    f"decreasing, but the smallest ball still reaches "
                    f"{maxima[-1] / scale:.2e} of the family scale"
                ),
                details=details,
            ))

        # Check 3: Gauge bound w_{j(k)} >= k·d
        gauge = family.gauge(X, T) if X.shape[0] else np.empty(0)
        failures = {}
        indices = {}
        for k in GAUGE_LEVELS:
            jk = family.index_for_gauge(k)
            indices[k] = jk
            wk = family.member(jk).values(X, T) if X.shape[0] else np.empty(0)
            slack = wk - k * gauge
            bad = slack < -1e-9 * np.maximum(1.0, np.abs(wk))
            if bad.any():
                failures[k] = int(bad.sum())
        details = {"indices": {str(k): v for k, v in indices.items()}}
        if failures:
            checks.append(ValidationResult(
                check_name="gauge_bound",
                status="FAIL",
                message=f"w_j(k) < k*d for k in {sorted(failures)}",
                details={**details, "violations": {str(k): v for k, v in failures.items()}},
            ))
        else:
            checks.append(ValidationResult(
                check_name="gauge_bound",
                status="PASS",
                message=f"w_j(k) >= k*d for k in {list(GAUGE_LEVELS)}",
                details=details,
            ))

    # Check 4: Calibration constants
    constants = family.calibration(j)
    nonfinite = _finite_constants(constants)
    relations = _calibration_relations(family, j)
    broken = [name for name, ok in relations.items() if not ok]
    if nonfinite or broken:
        checks.append(ValidationResult(
            check_name="calibration",
            status="FAIL",
            message=f"non-finite constants {nonfinite}, broken relations {broken}",
            details={"relations": relations},
        ))
    else:
        checks.append(ValidationResult(
            check_name="calibration",
            status="PASS",
            message=f"{len(relations)} relations hold, all constants finite",
            details={"relations": relations},
        ))

    has_fail = any(c.status == "FAIL" for c in checks)
    has_warn = any(c.status == "WARN" for c in checks)

    if has_fail:
        overall_status = "FAIL"
    elif has_warn:
        overall_status = "WARN"
    else:
        overall_status = "PASS"

    report = ValidationReport(
        family=family.name,
        j=j,
        timestamp=datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
        checks=checks,
        overall_status=overall_status,
    )
    logger.info(f"Validated {family.name}[j={j}]: {overall_status}")

    if output_dir:
        output_path = Path(output_dir)
        output_path.mkdir(parents=True, exist_ok=True)
        report_file = output_path / f"validation_{family.name}_j{j}.json"
        with open(report_file, "w", encoding="utf-8") as f:
            json.dump(report.model_dump(), f, indent=2, ensure_ascii=False)
        logger.info(f"Validation report saved: {report_file}")

    return report
