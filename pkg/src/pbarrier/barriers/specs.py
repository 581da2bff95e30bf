"""Family specifications as they appear in experiment configs."""

from __future__ import annotations

import logging
from typing import Annotated, Any, Callable, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from pbarrier.barriers.barenblatt import barenblatt_field, barenblatt_support
from pbarrier.barriers.calibration import (
    ExteriorBallParams,
    PetrovskiiParams,
    SingularFinalParams,
)
from pbarrier.barriers.families import (
    make_cone1d_family,
    make_exterior_ball_family,
    make_north_pole_family,
    make_petrovskii_family,
    make_psi_family,
    make_singular_final_family,
)
from pbarrier.core.errors import ParameterError
from pbarrier.core.family import BarrierFamily
from pbarrier.core.models import PParams, SpaceTimePoint
from pbarrier.geometry.domains import suggest

logger = logging.getLogger(__name__)


class _FamilySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PsiSpec(_FamilySpec):
    kind: Literal["psi"] = "psi"
    diam_theta: float = Field(1.0, gt=0.0, description="Diameter of the domain")
    xi0: SpaceTimePoint | None = None


class ExteriorBallSpec(_FamilySpec):
    kind: Literal["exterior_ball"] = "exterior_ball"
    center: list[float] = Field(..., min_length=2, description="ξ₁ = (x₁, t₁) with x₁ != 0")
    radius: float | None = Field(None, gt=0.0, description="R₁; defaults to |ξ₁|")


class NorthPoleFamilySpec(_FamilySpec):
    kind: Literal["north_pole"] = "north_pole"
    theta: float = Field(1.0, gt=0.0)
    l: float = Field(4.0, gt=0.0)  # noqa: E741
    k: float = Field(2.0, gt=1.0)
    radius: float = Field(1.0, gt=0.0)


class Cone1dFamilySpec(_FamilySpec):
    kind: Literal["cone1d"] = "cone1d"
    gamma: float = Field(1.0, gt=0.0)
    orientation: Literal["horizontal", "downward"] = "horizontal"
    radius: float = Field(1.0, gt=0.0)


class PetrovskiiFamilySpec(_FamilySpec):
    kind: Literal["petrovskii"] = "petrovskii"
    alpha: float = Field(1.0, gt=0.0)
    K: float = Field(1.0, gt=0.0)


class SingularFinalFamilySpec(_FamilySpec):
    kind: Literal["singular_final"] = "singular_final"
    l: float = Field(1.0, gt=0.0)  # noqa: E741
    K: float = Field(2.0, gt=1.0)
    alpha: float | None = None


class BarenblattFamilySpec(_FamilySpec):
    kind: Literal["barenblatt"] = "barenblatt"
    C: float = Field(1.0, gt=0.0, description="Profile constant")
    t1: float = Field(0.5, gt=0.0)
    t2: float = Field(1.5, gt=0.0)
    shrink: float = Field(0.9, gt=0.0, lt=1.0)


FamilySpec = Annotated[
    Union[
        PsiSpec,
        ExteriorBallSpec,
        NorthPoleFamilySpec,
        Cone1dFamilySpec,
        PetrovskiiFamilySpec,
        SingularFinalFamilySpec,
        BarenblattFamilySpec,
    ],
    Field(discriminator="kind"),
]

_SPEC_ADAPTER: TypeAdapter = TypeAdapter(FamilySpec)


def _build_psi(spec: PsiSpec, params: PParams) -> BarrierFamily:
    return make_psi_family(params, spec.diam_theta, spec.xi0)


def _build_exterior_ball(spec: ExteriorBallSpec, params: PParams) -> BarrierFamily:
    ball = ExteriorBallParams(p=params.p, n=params.n, center=tuple(spec.center), radius=spec.radius)
    return make_exterior_ball_family(params, ball)


def _build_north_pole(spec: NorthPoleFamilySpec, params: PParams) -> BarrierFamily:
    return make_north_pole_family(params, spec.theta, spec.l, spec.k, spec.radius)


def _build_cone1d(spec: Cone1dFamilySpec, params: PParams) -> BarrierFamily:
    return make_cone1d_family(params, spec.gamma, spec.orientation, spec.radius)


def _build_petrovskii(spec: PetrovskiiFamilySpec, params: PParams) -> BarrierFamily:
    return make_petrovskii_family(
        PetrovskiiParams(p=params.p, n=params.n, alpha=spec.alpha, K=spec.K)
    )


def _build_singular_final(spec: SingularFinalFamilySpec, params: PParams) -> BarrierFamily:
    return make_singular_final_family(
        SingularFinalParams(p=params.p, n=params.n, l=spec.l, K=spec.K, alpha=spec.alpha)
    )


def _build_barenblatt(spec: BarenblattFamilySpec, params: PParams) -> BarrierFamily:
    """B_p wrapped as a one-member family, certified as an exact solution."""
    domain = barenblatt_support(params, spec.C, spec.t1, spec.t2, spec.shrink)
    field = barenblatt_field(params, spec.C)

    return BarrierFamily(
        "barenblatt",
        params,
        lambda j: field,
        lambda X, T: np.zeros_like(T),
        1,
        domain,
        SpaceTimePoint(x=(0.0,) * params.n, t=spec.t1),
        sense="solution",
        constants={"C": spec.C, "lambda": params.lambda_()},
    )


_BUILDERS: dict[str, Callable[[Any, PParams], BarrierFamily]] = {
    "psi": _build_psi,
    "exterior_ball": _build_exterior_ball,
    "north_pole": _build_north_pole,
    "cone1d": _build_cone1d,
    "petrovskii": _build_petrovskii,
    "singular_final": _build_singular_final,
    "barenblatt": _build_barenblatt,
}

FAMILY_KINDS = tuple(_BUILDERS)


def parse_family_spec(spec: FamilySpec | dict[str, Any]) -> BaseModel:
    """Validate a family spec given as a model or a JSON-style dict."""
    if isinstance(spec, BaseModel):
        return spec
    kind = spec.get("kind")
    if kind not in _BUILDERS:
        raise ParameterError(f"unknown family '{kind}'{suggest(str(kind), FAMILY_KINDS)}")
    try:
        return _SPEC_ADAPTER.validate_python(spec)
    except ValidationError as e:
        raise ParameterError(f"invalid {kind} family spec: {e}") from e


def build_family(spec: FamilySpec | dict[str, Any], params: PParams) -> BarrierFamily:
    """Build the family named by spec for the given equation parameters.

    Raises:
        ParameterError: On unknown kinds or parameters outside the family's range
    """
    model = parse_family_spec(spec)
    try:
        family = _BUILDERS[model.kind](model, params)
    except ValidationError as e:
        raise ParameterError(f"{model.kind}: {e}") from e
    logger.info(f"Built {family!r}")
    return family
