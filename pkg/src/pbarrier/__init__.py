"""pbarrier: barrier families and regularity experiments for a·∂ₜu = Δ_p u.

Builds explicit barrier families for boundary points of space-time
domains, certifies them as p-super- or subparabolic at sampled points,
and probes boundary regularity with an explicit finite-difference solver.
"""

__version__ = "0.1.0"
