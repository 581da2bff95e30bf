"""Tests for the barrier families, their calibration and pasting."""

import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from pbarrier.barriers import (
    FAMILY_KINDS,
    ExteriorBallParams,
    PetrovskiiParams,
    SingularFinalParams,
    barenblatt,
    barenblatt_support_radius,
    build_family,
    cone_alpha,
    cone_mu0,
    exhibit_decay,
    exhibit_floor,
    exhibit_residual,
    make_north_pole_family,
    make_psi_family,
    north_pole_m,
    parse_family_spec,
    paste_min,
    petrovskii_positivity_holds,
    petrovskii_rho,
    validate_family,
)
from pbarrier.core import ParameterError, PastingError, PParams, ScalarField, constant_field
from pbarrier.geometry import sample_domain
from pbarrier.geometry.domains import SingularSupercriticalSpec, make_domain
from pbarrier.residual import DEGENERATE_FLOOR, certify


@pytest.fixture
def petrovskii_constants():
    return PetrovskiiParams(p=3.0, n=1, alpha=1.0, K=1.0)


class TestPetrovskiiCalibration:
    """Test the constants of the p > 2 Petrovskiĭ family."""

    def test_lambda(self, petrovskii_constants):
        assert petrovskii_constants.lam == 4.0

    def test_weight_maximum(self, petrovskii_constants):
        # g(u) = e^{u/4}(−u − 1) peaks at u = −5
        assert petrovskii_constants.M == pytest.approx(4.0 * math.exp(-1.25), rel=1e-6)
        assert petrovskii_constants.t_star == pytest.approx(-math.exp(-5.0), rel=1e-4)

    def test_newton_agrees_with_search(self, petrovskii_constants):
        assert petrovskii_constants.M_newton == pytest.approx(petrovskii_constants.M, rel=1e-8)

    def test_epsilon_relation(self, petrovskii_constants):
        eps, M = petrovskii_constants.epsilon, petrovskii_constants.M
        assert eps == pytest.approx(0.75 / M, rel=1e-12)
        assert (eps * M) ** (3.0 - 2.0) == pytest.approx(3.0 / 4.0)

    def test_A(self, petrovskii_constants):
        eps = petrovskii_constants.epsilon
        assert petrovskii_constants.A(10) == pytest.approx(eps**2 * 25.0, rel=1e-12)

    def test_j_min_is_smallest(self, petrovskii_constants):
        c = petrovskii_constants
        assert c.j_min * c.R > c.L * c.K
        assert (c.j_min - 1) * c.R <= c.L * c.K or c.j_min == 1

    def test_index_for_gauge_is_monotone(self, petrovskii_constants):
        c = petrovskii_constants
        indices = [c.index_for_gauge(k) for k in (1, 2, 4, 8)]
        assert indices == sorted(indices)
        for k, j in zip((1, 2, 4, 8), indices):
            assert c.gauge_coefficient(j) >= k

    def test_rejects_p_at_most_two(self):
        with pytest.raises(ValidationError):
            PetrovskiiParams(p=2.0)

    def test_member_is_below_rho_and_positive(self, petrovskii_constants):
        family = build_family({"kind": "petrovskii"}, PParams(p=3, n=1))
        j = family.j_min
        X, T = sample_domain(family.domain, 300, seed=1)
        values = family.member(j).values(X, T)
        assert np.all(values <= petrovskii_rho(petrovskii_constants, j, T) * (1 + 1e-12))
        inside = petrovskii_positivity_holds(petrovskii_constants, j, X, T)
        assert np.all(values[inside] > 0)


class TestExteriorBall:
    """Test the exterior-ball calibration."""

    def test_constants(self):
        ball = ExteriorBallParams(p=3.0, n=1, center=(1.0, 0.0))
        assert ball.R1 == 1.0
        assert ball.R2 == 0.5
        np.testing.assert_allclose(ball.xi2, [0.5, 0.0])
        assert ball.delta == 0.25
        assert ball.C0 == pytest.approx(0.25**3)
        assert ball.j0 == 16

    def test_rejects_pole(self):
        with pytest.raises(ValidationError, match="pole"):
            ExteriorBallParams(p=3.0, n=1, center=(0.0, 1.0))

    def test_rejects_radius_off_sphere(self):
        with pytest.raises(ValidationError, match="must equal"):
            ExteriorBallParams(p=3.0, n=1, center=(1.0, 0.0), radius=0.5)

    def test_rejects_p_two(self):
        with pytest.raises(ValidationError, match="p != 2"):
            ExteriorBallParams(p=2.0, n=1, center=(1.0, 0.0))

    def test_gamma_in_log_space(self):
        ball = ExteriorBallParams(p=3.0, n=1, center=(1.0, 0.0))
        assert ball.gamma(20) == pytest.approx(math.exp(ball.log_gamma(20)))
        assert math.isfinite(ball.log_gamma(10_000))

    def test_family_members_vanish_on_inner_sphere(self):
        family = build_family({"kind": "exterior_ball", "center": [1.0, 0.0]}, PParams(p=3, n=1))
        w = family.member(family.j_min)
        # the origin lies on the sphere |ξ − ξ₂| = R₂
        assert abs(w(0.0, 0.0)) < 1e-9 * max(1.0, family.calibration(family.j_min)["gamma"])


class TestNorthPole:
    """Test the north-pole family."""

    def test_m_j(self):
        params = PParams(p=3, n=1)
        assert north_pole_m(params, 1.0, 4.0, 2.0, 16) == pytest.approx((2 / 3) * 2 - 1)

    def test_j_min(self):
        family = make_north_pole_family(PParams(p=3, n=1), 1.0, 4.0, 2.0)
        assert family.j_min in (81, 82)
        assert family.calibration(family.j_min)["m_j"] > 0

    def test_rejects_small_l(self):
        with pytest.raises(ParameterError, match="requires l > p"):
            make_north_pole_family(PParams(p=3, n=1), 1.0, 3.0, 2.0)

    def test_rejects_non_diverging_m(self):
        with pytest.raises(ParameterError, match="does not diverge"):
            make_north_pole_family(PParams(p=3, n=1), 1.0, 4.0, 3.0)

    def test_pasted_member_is_constant_far_from_pole(self):
        family = make_north_pole_family(PParams(p=3, n=1), 1.0, 4.0, 2.0)
        j = family.j_min
        m_j = family.calibration(j)["m_j"]
        assert family.member(j)(0.9, -0.5) == pytest.approx(m_j)


class TestConeAndSingular:
    """Test the cone and singular-final calibrations."""

    def test_cone_mu0(self):
        assert cone_mu0(3.0, 1.0) == pytest.approx(math.exp(2.0) / 2.0)
        family = build_family({"kind": "cone1d", "gamma": 1.0}, PParams(p=3, n=1))
        assert family.j_min == math.ceil(math.exp(2.0) / 2.0)

    def test_cone_alpha_singular(self):
        assert cone_alpha(1.5, 1.0, 1.0) == pytest.approx(4.0)
        family = build_family({"kind": "cone1d", "gamma": 1.0}, PParams(p=1.5, n=1))
        assert family.j_min == 1
        assert family.calibration(1)["alpha"] >= 1.0

    def test_cone_requires_one_dimension(self):
        with pytest.raises(ParameterError, match="requires n = 1"):
            build_family({"kind": "cone1d"}, PParams(p=3, n=2))

    def test_horizontal_cone_domain_keeps_members_positive(self):
        family = build_family({"kind": "cone1d", "gamma": 1.0}, PParams(p=3, n=1))
        assert not family.domain.contains(np.array([0.2]), -0.3)
        assert family.domain.contains(np.array([0.2]), -0.5)
        x, t = np.meshgrid(np.linspace(-0.9, 0.9, 61), np.linspace(-0.9, -0.01, 61))
        X, T = x.reshape(-1, 1), t.ravel()
        inside = family.domain.contains_points(X, T) & (np.hypot(X[:, 0], T) > 0.05)
        values = family.member(family.j_min).values(X[inside], T[inside])
        assert inside.sum() > 100
        assert np.all(values > 0.0)

    def test_singular_final_window(self):
        sp = SingularFinalParams(p=1.5, l=1.0, K=2.0)
        assert sp.alpha_window == pytest.approx((4.0, 4.5))
        assert sp.alpha_value == pytest.approx(4.25)
        assert sp.radius(2) == pytest.approx(0.25)
        assert sp.operator_bound_holds(sp.j_min)

    def test_singular_final_member_is_constant_off_the_axis(self):
        family = build_family({"kind": "singular_final"}, PParams(p=1.5, n=1))
        sp = SingularFinalParams(p=1.5, l=1.0, K=2.0)
        j = family.j_min
        assert family.sense == "super"
        assert family.member(j)(0.9, -0.5) == pytest.approx(sp.m(j))

    def test_singular_final_rejects_alpha_outside_window(self):
        with pytest.raises(ValidationError, match="outside the admissible window"):
            SingularFinalParams(p=1.5, l=1.0, K=2.0, alpha=5.0)
        with pytest.raises(ValidationError, match="empty α window"):
            SingularFinalParams(p=1.5, l=1.6, K=2.0)


class TestPsiFamily:
    """Test the ψ_j minorants."""

    def test_is_subsolution(self):
        family = make_psi_family(PParams(p=3, n=1), diam_theta=1.0)
        for j in (1, 2):
            report = certify(family.member(j), family.params, family.domain, samples=500, sense="sub")
            assert report.passed

    def test_attached_residual(self):
        family = make_psi_family(PParams(p=3, n=1), diam_theta=2.0)
        w = family.member(2)
        # j^{p−1} n ((t − t₀)/diam − 1) at t = 1
        assert w.residual_closed_form(np.array([[0.1]]), np.array([1.0]))[0] == pytest.approx(-2.0)

    def test_rejects_nonpositive_diameter(self):
        with pytest.raises(ParameterError, match="diam_theta must be positive"):
            make_psi_family(PParams(p=3, n=1), diam_theta=0.0)


class TestBarenblatt:
    """Test the Barenblatt source-type solution."""

    def test_value_at_origin(self):
        params = PParams(p=3, n=1)
        assert barenblatt(params, 1.0, 0.0, 1.0) == pytest.approx(1.0)
        assert barenblatt(params, 1.0, 0.0, 16.0) == pytest.approx(0.5)

    def test_vanishes_outside_support(self):
        params = PParams(p=3, n=1)
        r = barenblatt_support_radius(params, 1.0, 1.0)
        assert barenblatt(params, 1.0, 1.01 * r, 1.0) == 0.0
        assert barenblatt(params, 1.0, 0.99 * r, 1.0) > 0.0

    def test_is_exact_solution(self):
        family = build_family({"kind": "barenblatt"}, PParams(p=3, n=1))
        report = certify(family.member(1), family.params, family.domain, samples=500, sense="solution")
        assert report.passed

    def test_rejects_nonpositive_time(self):
        with pytest.raises(ParameterError, match="t > 0"):
            barenblatt(PParams(p=3, n=1), 1.0, 0.0, 0.0)


class TestPasting:
    """Test min-pasting of an inner field over an outer one."""

    @pytest.fixture
    def parts(self):
        outer = constant_field(1.0, 1, label="one")
        inner = ScalarField(
            lambda X, T: 4.0 * X[:, 0] ** 2,
            1,
            dt=lambda X, T: np.zeros_like(T),
            grad=lambda X, T: 8.0 * X,
            hessian=lambda X, T: np.full((X.shape[0], 1, 1), 8.0),
            label="bowl",
        )
        region = make_domain({"kind": "box", "lower": [-0.5], "upper": [0.5], "t1": -1.0, "t2": 0.0})
        domain = make_domain({"kind": "box", "lower": [-1.0], "upper": [1.0], "t1": -1.0, "t2": 0.0})
        return outer, inner, region, domain

    def test_values_and_branch_derivatives(self, parts):
        w = paste_min(*parts, strict=True)
        assert w(0.25, -0.5) == pytest.approx(0.25)
        assert w(0.8, -0.5) == 1.0
        assert w.gradient(0.2, -0.5) == pytest.approx(1.6)
        assert w.gradient(0.8, -0.5) == 0.0

    def test_discontinuity_is_detected(self, parts):
        outer, _, region, domain = parts
        with pytest.raises(PastingError, match="discontinuity"):
            paste_min(outer, constant_field(0.0, 1), region, domain, strict=True)

    def test_gap_is_exposed_on_the_field(self, parts):
        outer, _, region, domain = parts
        w = paste_min(outer, constant_field(0.0, 1), region, domain)
        assert w.paste_gap == pytest.approx(1.0)

    def test_continuous_paste_has_no_gap(self, parts):
        w = paste_min(*parts)
        assert w.paste_gap is not None
        assert w.paste_gap <= 1e-9


class TestSpecsAndValidation:
    """Test family specs and the executable family conditions."""

    def test_every_kind_is_buildable(self):
        assert set(FAMILY_KINDS) == {
            "psi", "exterior_ball", "north_pole", "cone1d", "petrovskii", "singular_final", "barenblatt"
        }

    def test_unknown_family_suggests(self):
        with pytest.raises(ParameterError, match="did you mean 'petrovskii'"):
            parse_family_spec({"kind": "petrovsky"})

    def test_invalid_spec(self):
        with pytest.raises(ParameterError, match="invalid psi family spec"):
            parse_family_spec({"kind": "psi", "diam_theta": -1.0})

    def test_out_of_range_parameters(self):
        with pytest.raises(ParameterError):
            build_family({"kind": "petrovskii"}, PParams(p=1.5, n=1))

    def test_barenblatt_validation_passes(self, tmp_path):
        family = build_family({"kind": "barenblatt"}, PParams(p=3, n=1))
        report = validate_family(family, samples=300, output_dir=tmp_path)
        assert report.overall_status == "PASS"
        assert [c.check_name for c in report.checks] == ["positivity", "calibration"]
        saved = json.loads((tmp_path / "validation_barenblatt_j1.json").read_text())
        assert saved["overall_status"] == "PASS"

    def test_psi_validation(self):
        family = make_psi_family(PParams(p=3, n=1), diam_theta=1.0)
        report = validate_family(family, samples=300)
        by_name = {c.check_name: c.status for c in report.checks}
        assert by_name["positivity"] == "PASS"
        assert by_name["gauge_bound"] == "PASS"
        assert by_name["calibration"] == "PASS"
        assert report.overall_status != "FAIL"

    def test_petrovskii_calibration_relations(self):
        family = build_family({"kind": "petrovskii"}, PParams(p=3, n=1))
        report = validate_family(family, samples=200)
        calibration = next(c for c in report.checks if c.check_name == "calibration")
        assert calibration.status == "PASS"
        assert all(calibration.details["relations"].values())


class TestSingularSupercritical:
    """Test the single barrier of the singular supercritical range."""

    def test_members_decay(self):
        spec = SingularSupercriticalSpec(p=1.8, n=1)
        X, T = np.array([[0.0]]), np.array([-0.1])
        maxima = exhibit_decay(spec, [10.0, 100.0, 1000.0], X, T)
        assert maxima[0] > maxima[1] > maxima[2] > 0
        # e = (p−1)/(2−p) = 4 at the origin
        assert maxima[1] / maxima[0] == pytest.approx(1e-4, rel=1e-6)

    def test_residual_check_with_scaled_floor(self):
        spec = SingularSupercriticalSpec(p=1.8, n=1)
        report = exhibit_residual(spec, 100.0, samples=500)

        assert report.sense == "super"
        assert report.points_sampled == 500
        assert report.violations == 0
        assert report.excluded_fraction < 0.01

    def test_unscaled_floor_exclusions_are_reported(self):
        """With the family floor most large-j samples are degenerate, and the report says so."""
        spec = SingularSupercriticalSpec(p=1.8, n=1)
        report = exhibit_residual(spec, 100.0, samples=500, floor=DEGENERATE_FLOOR)

        assert report.excluded_degenerate > 250
        assert report.excluded_fraction == report.excluded_degenerate / 500
        assert report.violations == 0

    def test_floor_follows_gradient_scale(self):
        spec = SingularSupercriticalSpec(p=1.8, n=1)
        # (p−1)/(2−p) + 1 = 5
        assert exhibit_floor(spec, 10.0) == pytest.approx(DEGENERATE_FLOOR * 1e-5)
