"""Explicit barrier families, their calibration and pasting."""

from pbarrier.barriers.barenblatt import (
    barenblatt,
    barenblatt_field,
    barenblatt_support,
    barenblatt_support_radius,
)
from pbarrier.barriers.calibration import (
    ExteriorBallParams,
    PetrovskiiParams,
    SingularFinalParams,
    maximize_weight,
    petrovskii_width,
    stationary_weight,
)
from pbarrier.barriers.exhibits import (
    exhibit_decay,
    exhibit_floor,
    exhibit_residual,
    singular_supercritical_barrier,
)
from pbarrier.barriers.families import (
    cone_alpha,
    cone_mu0,
    make_cone1d_family,
    make_exterior_ball_family,
    make_north_pole_family,
    make_petrovskii_family,
    make_psi_family,
    make_singular_final_family,
    north_pole_m,
    petrovskii_positivity_holds,
    petrovskii_rho,
)
from pbarrier.barriers.pasting import interface_points, paste_min
from pbarrier.barriers.specs import FAMILY_KINDS, FamilySpec, build_family, parse_family_spec
from pbarrier.barriers.validation import ValidationReport, ValidationResult, validate_family

__all__ = [
    "FAMILY_KINDS",
    "ExteriorBallParams",
    "FamilySpec",
    "PetrovskiiParams",
    "SingularFinalParams",
    "ValidationReport",
    "ValidationResult",
    "barenblatt",
    "barenblatt_field",
    "barenblatt_support",
    "barenblatt_support_radius",
    "build_family",
    "cone_alpha",
    "cone_mu0",
    "exhibit_decay",
    "exhibit_floor",
    "exhibit_residual",
    "interface_points",
    "make_cone1d_family",
    "make_exterior_ball_family",
    "make_north_pole_family",
    "make_petrovskii_family",
    "make_psi_family",
    "make_singular_final_family",
    "maximize_weight",
    "north_pole_m",
    "parse_family_spec",
    "paste_min",
    "petrovskii_positivity_holds",
    "petrovskii_rho",
    "petrovskii_width",
    "singular_supercritical_barrier",
    "stationary_weight",
]
