"""Space-time domain constructors.

Each named construction is described by a pydantic spec (discriminated on
``kind``) so that domains round-trip through JSON configuration files.
``make_domain`` turns a spec into a ``DomainGeometry`` whose membership
predicate evaluates the defining strict inequalities literally.

Time is always the last coordinate of a bounding box.
"""

from __future__ import annotations

import logging
import math
from typing import Annotated, Any, Callable, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError
from rapidfuzz import process

from pbarrier.core.errors import ParameterError
from pbarrier.core.fields import as_points
from pbarrier.core.models import SpaceTimePoint

logger = logging.getLogger(__name__)

BBOX_SLACK = 0.01
PETROVSKII_T_MIN = -1.0 / (2.0 * math.e)

Predicate = Callable[[np.ndarray, np.ndarray], np.ndarray]


class BoundingBox(BaseModel):
    """Axis-aligned space-time box; the last coordinate is time."""

    model_config = ConfigDict(frozen=True)

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.lower) - 1

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(np.subtract(self.upper, self.lower)))

    @property
    def t_range(self) -> tuple[float, float]:
        return self.lower[-1], self.upper[-1]

    def contains_points(self, X: np.ndarray, T: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        inside = (T > lo[-1]) & (T < hi[-1])
        for i in range(X.shape[1]):
            inside &= (X[:, i] > lo[i]) & (X[:, i] < hi[i])
        return inside

    def intersect(self, other: BoundingBox) -> BoundingBox:
        return BoundingBox(
            lower=tuple(max(a, b) for a, b in zip(self.lower, other.lower)),
            upper=tuple(min(a, b) for a, b in zip(self.upper, other.upper)),
        )

    def padded(self, slack: float = BBOX_SLACK) -> BoundingBox:
        """Widen each side by slack times the side length."""
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        pad = slack * (hi - lo)
        return BoundingBox(lower=tuple(lo - pad), upper=tuple(hi + pad))


class DomainGeometry:
    """A bounded open subset of R^{n+1} given by a membership predicate."""

    def __init__(
        self,
        kind: str,
        n: int,
        predicate: Predicate,
        bbox: BoundingBox,
        *,
        label: str | None = None,
        params: dict[str, Any] | None = None,
        radial_extent: Callable[[np.ndarray], np.ndarray] | None = None,
    ):
        """Create a domain.

        Args:
            kind: Construction name
            n: Spatial dimension
            predicate: Vectorised strict membership test on (X, T)
            bbox: Box outside of which the domain is empty
            label: Descriptive tag
            params: Construction parameters, for reports
            radial_extent: For domains of the form {|x| < y(t)}, the map t -> y(t)
        """
        if bbox.n != n:
            raise ParameterError(f"bbox has dimension {bbox.n}, domain declares n={n}")
        self.kind = kind
        self.n = n
        self._predicate = predicate
        self.bbox = bbox
        self.label = label or kind
        self.params = dict(params or {})
        self.radial_extent = radial_extent

    def __repr__(self) -> str:
        return f"DomainGeometry(kind={self.kind!r}, n={self.n}, bbox={self.bbox.lower}..{self.bbox.upper})"

    def contains_points(self, X: np.ndarray, T: np.ndarray) -> np.ndarray:
        inside = self.bbox.contains_points(X, T)
        if inside.any():
            with np.errstate(all="ignore"):
                inside[inside] = np.asarray(self._predicate(X[inside], T[inside]), dtype=bool)
        return inside

    def contains(self, x, t):
        """Open-set membership of a point or of arrays of points."""
        X, T, single = as_points(x, t, self.n)
        out = self.contains_points(X, T)
        return bool(out[0]) if single else out

    def contains_point(self, point: SpaceTimePoint) -> bool:
        return self.contains(np.asarray(point.x), point.t)

    def restrict_to_ball(self, center: SpaceTimePoint, radius: float) -> DomainGeometry:
        """Return the intersection with the open ball B(center, radius)."""
        c = np.asarray(center.x, dtype=float)
        tc = float(center.t)

        def predicate(X, T):
            r2 = np.sum((X - c) ** 2, axis=1) + (T - tc) ** 2
            return (r2 < radius**2) & self._predicate(X, T)

        ball_box = BoundingBox(
            lower=tuple(c - radius) + (tc - radius,),
            upper=tuple(c + radius) + (tc + radius,),
        )
        return DomainGeometry(
            self.kind,
            self.n,
            predicate,
            self.bbox.intersect(ball_box),
            label=f"{self.label}∩B(r={radius:g})",
            params={**self.params, "ball_center": list(c) + [tc], "ball_radius": radius},
        )

    @classmethod
    def from_predicate(
        cls,
        predicate: Predicate,
        bbox: BoundingBox,
        label: str = "custom",
        params: dict[str, Any] | None = None,
    ) -> DomainGeometry:
        return cls("custom", bbox.n, predicate, bbox, label=label, params=params)


# -- analytic profiles -----------------------------------------------------


def log_weight(t, q: float):
    """(|log(−t)|^q − 1)/q, the logarithmic weight of the Petrovskiĭ-type domains."""
    return (np.abs(np.log(-np.asarray(t, dtype=float))) ** q - 1.0) / q


def _radial_norm(X: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(X**2, axis=1))


def _extent_box(n: int, extent: Callable, t_lo: float, t_hi: float) -> BoundingBox:
    """Bounding box of {|x| < y(t), t_lo < t < t_hi} from a dense sample of y."""
    span = t_hi - t_lo
    # geometric spacing toward both ends catches maxima at either end
    s = np.concatenate([
        t_lo + span * np.geomspace(1e-12, 1.0, 2000),
        t_hi - span * np.geomspace(1e-12, 1.0, 2000),
    ])
    s = s[(s > t_lo) & (s < t_hi)]
    with np.errstate(all="ignore"):
        y = np.asarray(extent(s), dtype=float)
    y_max = float(np.nanmax(y)) * (1.0 + BBOX_SLACK)
    return BoundingBox(lower=(-y_max,) * n + (t_lo,), upper=(y_max,) * n + (t_hi,))


# -- specs -----------------------------------------------------------------


class _Spec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class BoxSpec(_Spec):
    """Open box (a_1,b_1)×…×(a_n,b_n)×(t_1,t_2)."""

    kind: Literal["box"] = "box"
    lower: list[float] = Field(..., min_length=1)
    upper: list[float] = Field(..., min_length=1)
    t1: float = 0.0
    t2: float = 1.0


class CylinderSpec(_Spec):
    """G×(0,T) with G a spatial box cut by optional half-spaces normal·x < offset."""

    kind: Literal["cylinder"] = "cylinder"
    lower: list[float] = Field(default_factory=lambda: [0.0], min_length=1)
    upper: list[float] = Field(default_factory=lambda: [1.0], min_length=1)
    T: float = Field(1.0, gt=0.0)
    halfspaces: list[tuple[list[float], float]] = Field(default_factory=list)


class BallComplementSpec(_Spec):
    """Ambient box minus the closed ball B(ξ₁, R₁)."""

    kind: Literal["ball_complement"] = "ball_complement"
    center: list[float] = Field(..., min_length=2, description="ξ₁ = (x₁, t₁)")
    radius: float | None = Field(None, gt=0.0, description="R₁; defaults to |ξ₁|")
    box_lower: list[float]
    box_upper: list[float]


class Cone1dSpec(_Spec):
    """B(0, radius) ∩ {t<0} minus a closed cone with vertex at the origin (n = 1)."""

    kind: Literal["cone_1d"] = "cone_1d"
    gamma: float = Field(1.0, gt=0.0)
    orientation: Literal["horizontal", "downward"] = "horizontal"
    radius: float = Field(1.0, gt=0.0)


class HorizontalConeSpec(_Spec):
    """{|x| < r, −r < t < 0} minus the closure of {|(x,t)| < θ x·v, t ≤ 0}."""

    kind: Literal["horizontal_cone_complement"] = "horizontal_cone_complement"
    theta: float = Field(..., gt=1.0)
    v: list[float] = Field(..., min_length=1)
    r: float = Field(1.0, gt=0.0)


class PetrovskiiSpec(_Spec):
    kind: Literal["petrovskii"] = "petrovskii"
    # any K > 0 gives a regular origin; a thin cusp keeps its tip above grid scale
    K: float = Field(0.02, gt=0.0)
    alpha: float = Field(1.0, gt=0.0)
    p: float = 3.0
    n: int = Field(1, ge=1)


class SingularFinalSpec(_Spec):
    kind: Literal["singular_final"] = "singular_final"
    K: float = Field(2.0, gt=0.0)
    l: float = Field(1.0, gt=0.0)  # noqa: E741
    p: float = 1.5
    n: int = Field(1, ge=1)


class BarenblattBallSpec(_Spec):
    kind: Literal["barenblatt_ball"] = "barenblatt_ball"
    p: float = 3.0
    n: int = Field(1, ge=1)
    T: float = Field(0.01, gt=0.0)


class NorthPoleSpec(_Spec):
    """{−1 < t < 0, t > −θ|x|^l, |x| < radius}."""

    kind: Literal["north_pole"] = "north_pole"
    theta: float = Field(1.0, gt=0.0)
    l: float = Field(4.0, gt=0.0)  # noqa: E741
    n: int = Field(1, ge=1)
    radius: float = Field(1.0, gt=0.0)


class TuskSpec(_Spec):
    """{−T < t < 0, |x − (−t)^{1/2}x₀|² < R²(−t)}; exploratory only."""

    kind: Literal["tusk"] = "tusk"
    x0: list[float] = Field(..., min_length=1)
    R: float = Field(..., gt=0.0)
    T: float = Field(1.0, gt=0.0)


class SingularSupercriticalSpec(_Spec):
    kind: Literal["singular_supercritical"] = "singular_supercritical"
    K: float = Field(1.0, gt=0.0)
    alpha: float = Field(1.0, gt=0.0)
    p: float = 1.8
    n: int = Field(1, ge=1)


DomainSpec = Annotated[
    Union[
        BoxSpec,
        CylinderSpec,
        BallComplementSpec,
        Cone1dSpec,
        HorizontalConeSpec,
        PetrovskiiSpec,
        SingularFinalSpec,
        BarenblattBallSpec,
        NorthPoleSpec,
        TuskSpec,
        SingularSupercriticalSpec,
    ],
    Field(discriminator="kind"),
]

_SPEC_ADAPTER: TypeAdapter = TypeAdapter(DomainSpec)


# -- builders --------------------------------------------------------------


def _build_box(spec: BoxSpec) -> DomainGeometry:
    if len(spec.lower) != len(spec.upper):
        raise ParameterError("box lower and upper must have the same length")
    if any(b <= a for a, b in zip(spec.lower, spec.upper)) or spec.t2 <= spec.t1:
        raise ParameterError("box sides must have positive length")
    bbox = BoundingBox(lower=tuple(spec.lower) + (spec.t1,), upper=tuple(spec.upper) + (spec.t2,))
    return DomainGeometry(
        "box", len(spec.lower), lambda X, T: np.ones(T.shape, dtype=bool), bbox,
        params=spec.model_dump(),
    )


def _build_cylinder(spec: CylinderSpec) -> DomainGeometry:
    n = len(spec.lower)
    if len(spec.upper) != n:
        raise ParameterError("cylinder lower and upper must have the same length")
    normals = [np.asarray(a, dtype=float) for a, _ in spec.halfspaces]
    offsets = [float(b) for _, b in spec.halfspaces]
    if any(v.shape != (n,) for v in normals):
        raise ParameterError(f"half-space normals must have length {n}")

    def predicate(X, T):
        inside = np.ones(T.shape, dtype=bool)
        for v, b in zip(normals, offsets):
            inside &= X @ v < b
        return inside

    bbox = BoundingBox(lower=tuple(spec.lower) + (0.0,), upper=tuple(spec.upper) + (spec.T,))
    return DomainGeometry("cylinder", n, predicate, bbox, params=spec.model_dump())


def _build_ball_complement(spec: BallComplementSpec) -> DomainGeometry:
    center = np.asarray(spec.center, dtype=float)
    n = center.size - 1
    radius = spec.radius if spec.radius is not None else float(np.linalg.norm(center))
    if not math.isclose(radius, float(np.linalg.norm(center)), rel_tol=1e-12):
        raise ParameterError("ball_complement requires the origin on the sphere: R₁ = |ξ₁|")
    if len(spec.box_lower) != n + 1 or len(spec.box_upper) != n + 1:
        raise ParameterError(f"ambient box must have {n + 1} coordinates")

    def predicate(X, T):
        r2 = np.sum((X - center[:-1]) ** 2, axis=1) + (T - center[-1]) ** 2
        return r2 > radius**2

    bbox = BoundingBox(lower=tuple(spec.box_lower), upper=tuple(spec.box_upper))
    return DomainGeometry(
        "ball_complement", n, predicate, bbox,
        params={**spec.model_dump(), "radius": radius},
    )


def _build_cone_1d(spec: Cone1dSpec) -> DomainGeometry:
    gamma, r = spec.gamma, spec.radius
    if spec.orientation == "horizontal":

        def predicate(X, T):
            x = X[:, 0]
            return (x**2 + T**2 < r**2) & (T < 0) & (np.abs(T) > gamma * x)

    else:

        def predicate(X, T):
            x = X[:, 0]
            return (x**2 + T**2 < r**2) & (T < 0) & (np.abs(x) > gamma * (-T))

    bbox = BoundingBox(lower=(-r, -r), upper=(r, 0.0))
    return DomainGeometry(
        "cone_1d", 1, predicate, bbox,
        label=f"cone_1d[{spec.orientation}]", params=spec.model_dump(),
    )


def _build_horizontal_cone(spec: HorizontalConeSpec) -> DomainGeometry:
    v = np.asarray(spec.v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ParameterError("cone axis v must be nonzero")
    v = v / norm
    n = v.size
    theta, r = spec.theta, spec.r

    def predicate(X, T):
        radius = np.sqrt(np.sum(X**2, axis=1) + T**2)
        return (_radial_norm(X) < r) & (T < 0) & (T > -r) & (radius > theta * (X @ v))

    bbox = BoundingBox(lower=(-r,) * n + (-r,), upper=(r,) * n + (0.0,))
    return DomainGeometry(
        "horizontal_cone_complement", n, predicate, bbox,
        params={**spec.model_dump(), "v": v.tolist()},
    )


def petrovskii_extent(K: float, alpha: float, p: float, n: int) -> Callable:
    """t ↦ y(t), the half-width of the Petrovskiĭ domain at time t."""
    lam = n * (p - 2.0) + p
    beta = p / (p - 1.0)

    def extent(t):
        s = -np.asarray(t, dtype=float)
        rhs = K * s ** (n * (p - 2.0) / lam) * log_weight(-s, p - 2.0) ** (alpha * (p - 2.0))
        return s ** (1.0 / lam) * rhs ** (1.0 / beta)

    return extent


def _build_petrovskii(spec: PetrovskiiSpec) -> DomainGeometry:
    p, n, K, alpha = spec.p, spec.n, spec.K, spec.alpha
    if p <= 2.0:
        raise ParameterError(f"petrovskii domain requires p > 2, got p={p}")
    lam = n * (p - 2.0) + p
    beta = p / (p - 1.0)

    def predicate(X, T):
        s = -T
        lhs = (_radial_norm(X) / s ** (1.0 / lam)) ** beta
        rhs = K * s ** (n * (p - 2.0) / lam) * log_weight(T, p - 2.0) ** (alpha * (p - 2.0))
        return (T > PETROVSKII_T_MIN) & (T < 0) & (lhs < rhs)

    extent = petrovskii_extent(K, alpha, p, n)
    bbox = _extent_box(n, extent, PETROVSKII_T_MIN, 0.0)
    return DomainGeometry(
        "petrovskii", n, predicate, bbox, params=spec.model_dump(), radial_extent=extent
    )


def _build_singular_final(spec: SingularFinalSpec) -> DomainGeometry:
    p, n, K, l = spec.p, spec.n, spec.K, spec.l  # noqa: E741
    if not 1.0 < p < 2.0:
        raise ParameterError(f"singular_final domain requires 1 < p < 2, got p={p}")
    if not 0.0 < l < p:
        raise ParameterError(f"singular_final domain requires 0 < l < p, got l={l}")

    def predicate(X, T):
        return (T > -1.0) & (T < 0) & (_radial_norm(X) ** l < K * (-T))

    def extent(t):
        return (K * (-np.asarray(t, dtype=float))) ** (1.0 / l)

    y = K ** (1.0 / l) * (1.0 + BBOX_SLACK)
    bbox = BoundingBox(lower=(-y,) * n + (-1.0,), upper=(y,) * n + (0.0,))
    return DomainGeometry(
        "singular_final", n, predicate, bbox, params=spec.model_dump(), radial_extent=extent
    )


def barenblatt_ball_level(p: float) -> float:
    """Right-hand side 1 − 2^{−(p−2)/(p−1)} of the Barenblatt-ball inequality."""
    return 1.0 - 2.0 ** (-(p - 2.0) / (p - 1.0))


def _build_barenblatt_ball(spec: BarenblattBallSpec) -> DomainGeometry:
    p, n, T_final = spec.p, spec.n, spec.T
    if p <= 2.0:
        raise ParameterError(f"barenblatt_ball requires p > 2, got p={p}")
    lam = n * (p - 2.0) + p
    beta = p / (p - 1.0)
    kappa = (p - 2.0) / (p * lam ** (1.0 / (p - 1.0)))
    level = barenblatt_ball_level(p)

    def predicate(X, T):
        s = -T
        z = _radial_norm(X) / s ** (1.0 / lam)
        return (T > -T_final) & (T < 0) & (kappa * z**beta < level)

    def extent(t):
        return (-np.asarray(t, dtype=float)) ** (1.0 / lam) * (level / kappa) ** (1.0 / beta)

    y = float(extent(-T_final)) * (1.0 + BBOX_SLACK)
    bbox = BoundingBox(lower=(-y,) * n + (-T_final,), upper=(y,) * n + (0.0,))
    return DomainGeometry(
        "barenblatt_ball", n, predicate, bbox, params=spec.model_dump(), radial_extent=extent
    )


def _build_north_pole(spec: NorthPoleSpec) -> DomainGeometry:
    theta, l, n, R = spec.theta, spec.l, spec.n, spec.radius  # noqa: E741

    def predicate(X, T):
        r = _radial_norm(X)
        return (T > -1.0) & (T < 0) & (T > -theta * r**l) & (r < R)

    bbox = BoundingBox(lower=(-R,) * n + (-1.0,), upper=(R,) * n + (0.0,))
    return DomainGeometry("north_pole", n, predicate, bbox, params=spec.model_dump())


def _build_tusk(spec: TuskSpec) -> DomainGeometry:
    x0 = np.asarray(spec.x0, dtype=float)
    n = x0.size
    R, T_final = spec.R, spec.T

    def predicate(X, T):
        s = -T
        shift = np.sqrt(np.clip(s, 0.0, None))[:, None] * x0
        return (T > -T_final) & (T < 0) & (np.sum((X - shift) ** 2, axis=1) < R**2 * s)

    root = math.sqrt(T_final)
    lower = tuple(min(0.0, root * (c - R)) for c in x0) + (-T_final,)
    upper = tuple(max(0.0, root * (c + R)) for c in x0) + (0.0,)
    return DomainGeometry("tusk", n, predicate, BoundingBox(lower=lower, upper=upper), params=spec.model_dump())


def singular_supercritical_extent(K: float, alpha: float, p: float, n: int) -> Callable:
    lam = n * (p - 2.0) + p
    beta = p / (p - 1.0)

    def extent(t):
        s = -np.asarray(t, dtype=float)
        rhs = K * s ** (n * (2.0 - p) / lam) * log_weight(-s, 2.0 - p) ** (alpha * (2.0 - p))
        return s ** (1.0 / lam) * rhs ** (1.0 / beta)

    return extent


def _build_singular_supercritical(spec: SingularSupercriticalSpec) -> DomainGeometry:
    p, n, K, alpha = spec.p, spec.n, spec.K, spec.alpha
    if not 2.0 * n / (n + 1.0) < p < 2.0:
        raise ParameterError(
            f"singular_supercritical domain requires 2n/(n+1) < p < 2, got p={p}, n={n}"
        )
    lam = n * (p - 2.0) + p
    beta = p / (p - 1.0)

    def predicate(X, T):
        s = -T
        lhs = (_radial_norm(X) / s ** (1.0 / lam)) ** beta
        rhs = K * s ** (n * (2.0 - p) / lam) * log_weight(T, 2.0 - p) ** (alpha * (2.0 - p))
        return (T > PETROVSKII_T_MIN) & (T < 0) & (lhs < rhs)

    extent = singular_supercritical_extent(K, alpha, p, n)
    bbox = _extent_box(n, extent, PETROVSKII_T_MIN, 0.0)
    return DomainGeometry(
        "singular_supercritical", n, predicate, bbox, params=spec.model_dump(), radial_extent=extent
    )


_BUILDERS: dict[str, Callable[[Any], DomainGeometry]] = {
    "box": _build_box,
    "cylinder": _build_cylinder,
    "ball_complement": _build_ball_complement,
    "cone_1d": _build_cone_1d,
    "horizontal_cone_complement": _build_horizontal_cone,
    "petrovskii": _build_petrovskii,
    "singular_final": _build_singular_final,
    "barenblatt_ball": _build_barenblatt_ball,
    "north_pole": _build_north_pole,
    "tusk": _build_tusk,
    "singular_supercritical": _build_singular_supercritical,
}

DOMAIN_KINDS = tuple(_BUILDERS)


def suggest(name: str, choices) -> str:
    """A ' (did you mean …?)' hint for a mistyped name, or ''."""
    match = process.extractOne(name, list(choices), score_cutoff=60)
    return f" (did you mean '{match[0]}'?)" if match else ""


def parse_domain_spec(spec: DomainSpec | dict[str, Any]) -> BaseModel:
    """Validate a domain spec given as a model or a JSON-style dict."""
    if isinstance(spec, BaseModel):
        return spec
    kind = spec.get("kind")
    if kind not in _BUILDERS:
        raise ParameterError(f"unknown domain kind '{kind}'{suggest(str(kind), DOMAIN_KINDS)}")
    try:
        return _SPEC_ADAPTER.validate_python(spec)
    except ValidationError as e:
        raise ParameterError(f"invalid {kind} domain spec: {e}") from e


def make_domain(spec: DomainSpec | dict[str, Any]) -> DomainGeometry:
    """Build the named domain described by spec.

    Args:
        spec: A DomainSpec model or a dict {"kind": ..., numeric params...}

    Returns:
        The DomainGeometry

    Raises:
        ParameterError: On unknown kinds or parameters outside a construction's range
    """
    model = parse_domain_spec(spec)
    domain = _BUILDERS[model.kind](model)
    logger.debug(f"Built domain {domain!r}")
    return domain
