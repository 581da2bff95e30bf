"""Space-time domains, rasterized masks and parabolic boundaries."""

from pbarrier.geometry.boundary import Cylinder, ParabolicBoundary, parabolic_boundary
from pbarrier.geometry.domains import (
    DOMAIN_KINDS,
    BallComplementSpec,
    BarenblattBallSpec,
    BoundingBox,
    BoxSpec,
    Cone1dSpec,
    CylinderSpec,
    DomainGeometry,
    DomainSpec,
    HorizontalConeSpec,
    NorthPoleSpec,
    PetrovskiiSpec,
    SingularFinalSpec,
    SingularSupercriticalSpec,
    TuskSpec,
    log_weight,
    make_domain,
    parse_domain_spec,
    petrovskii_extent,
)
from pbarrier.geometry.mask import SpaceTimeMask, rasterize, time_partition
from pbarrier.geometry.sampling import sample_domain, sample_near

__all__ = [
    "DOMAIN_KINDS",
    "BallComplementSpec",
    "BarenblattBallSpec",
    "BoundingBox",
    "BoxSpec",
    "Cone1dSpec",
    "Cylinder",
    "CylinderSpec",
    "DomainGeometry",
    "DomainSpec",
    "HorizontalConeSpec",
    "NorthPoleSpec",
    "ParabolicBoundary",
    "PetrovskiiSpec",
    "SingularFinalSpec",
    "SingularSupercriticalSpec",
    "SpaceTimeMask",
    "TuskSpec",
    "log_weight",
    "make_domain",
    "parabolic_boundary",
    "parse_domain_spec",
    "petrovskii_extent",
    "rasterize",
    "sample_domain",
    "sample_near",
    "time_partition",
]
