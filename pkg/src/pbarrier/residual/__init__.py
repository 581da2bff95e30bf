"""Numerical operators and sampled supersolution certification."""

from pbarrier.residual.certify import CertRecord, CertReport, certify
from pbarrier.residual.operators import (
    DEGENERATE_FLOOR,
    OperatorValues,
    evaluate_operator,
    p_laplacian_at,
    p_laplacian_from_derivatives,
    residual_at,
)
from pbarrier.residual.weak_form import MollifierBump, weak_form_check

__all__ = [
    "DEGENERATE_FLOOR",
    "CertRecord",
    "CertReport",
    "MollifierBump",
    "OperatorValues",
    "certify",
    "evaluate_operator",
    "p_laplacian_at",
    "p_laplacian_from_derivatives",
    "residual_at",
    "weak_form_check",
]
