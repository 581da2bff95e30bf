"""Explicit finite-difference experiments for a·∂ₜu = Δ_p u."""

from pbarrier.solver.checks import (
    ComparisonReport,
    ScalingReport,
    check_comparison,
    check_scaling_identity,
    smooth_bump_pair,
)
from pbarrier.solver.elliptic import EllipticSolution, solve_elliptic_aux_1d
from pbarrier.solver.grid import GridSolution
from pbarrier.solver.marching import (
    cylinder_mask,
    solve_cylinder_1d,
    solve_masked,
    solve_masked_batch,
    suggested_levels,
)
from pbarrier.solver.probes import PROBE_POINTS, ProbeReport, probe_point, regularity_probe
from pbarrier.solver.scheme import CFL_SAFETY, FluxScheme

__all__ = [
    "CFL_SAFETY",
    "ComparisonReport",
    "EllipticSolution",
    "FluxScheme",
    "GridSolution",
    "PROBE_POINTS",
    "ProbeReport",
    "ScalingReport",
    "check_comparison",
    "check_scaling_identity",
    "cylinder_mask",
    "probe_point",
    "regularity_probe",
    "smooth_bump_pair",
    "solve_cylinder_1d",
    "solve_elliptic_aux_1d",
    "solve_masked",
    "solve_masked_batch",
    "suggested_levels",
]
