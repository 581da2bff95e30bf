"""Tests for the p-Laplacian, the residual, certification and the weak form."""

import numpy as np
import pytest

from pbarrier.barriers import make_psi_family
from pbarrier.core import DegenerateGradientError, PParams, ScalarField
from pbarrier.geometry.domains import BoundingBox, make_domain
from pbarrier.residual import (
    MollifierBump,
    certify,
    evaluate_operator,
    p_laplacian_at,
    p_laplacian_from_derivatives,
    residual_at,
    weak_form_check,
)


@pytest.fixture
def unit_box():
    return make_domain({"kind": "box", "lower": [0.0], "upper": [1.0]})


def heat_solution() -> ScalarField:
    """e^{−t} sin x, an exact solution for p = 2, a = 1."""
    return ScalarField(
        lambda X, T: np.exp(-T) * np.sin(X[:, 0]),
        1,
        dt=lambda X, T: -np.exp(-T) * np.sin(X[:, 0]),
        grad=lambda X, T: (np.exp(-T) * np.cos(X[:, 0]))[:, None],
        hessian=lambda X, T: (-np.exp(-T) * np.sin(X[:, 0]))[:, None, None],
        label="heat",
    )


def linear_in_time() -> ScalarField:
    return ScalarField(lambda X, T: T, 1, label="t")


class TestOperators:
    """Test the non-divergence evaluation of Δ_p."""

    def test_p_two_is_laplacian(self):
        grad = np.array([[0.0, 0.0]])
        hess = np.array([[[1.0, 0.0], [0.0, 3.0]]])
        values, degenerate = p_laplacian_from_derivatives(grad, hess, 2.0)
        assert values[0] == 4.0
        assert not degenerate[0]

    def test_one_dimensional_expansion(self):
        # (p−1)|u'|^{p−2}u'' with u' = 2, u'' = 1
        values, _ = p_laplacian_from_derivatives(np.array([[2.0]]), np.array([[[1.0]]]), 3.0)
        assert values[0] == pytest.approx(4.0)

    def test_floor_for_degenerate_p(self):
        values, degenerate = p_laplacian_from_derivatives(
            np.array([[0.0]]), np.array([[[1.0]]]), 3.0
        )
        assert values[0] == 0.0
        assert not degenerate[0]

    def test_floor_for_singular_p(self):
        values, degenerate = p_laplacian_from_derivatives(
            np.array([[0.0], [0.0]]), np.array([[[1.0]], [[0.0]]]), 1.5
        )
        assert degenerate.tolist() == [True, False]
        assert np.isnan(values[0])
        assert values[1] == 0.0

    def test_radial_power(self):
        # Δ_p(((p−1)/p)|x|^{p/(p−1)}) = n
        p = 3.0
        beta = p / (p - 1.0)
        field = ScalarField(
            lambda X, T: ((p - 1.0) / p) * np.sum(X**2, axis=1) ** (beta / 2.0), 2
        )
        assert p_laplacian_at(field, PParams(p=p, n=2), [0.3, 0.4], 0.0) == pytest.approx(
            2.0, rel=1e-4
        )

    def test_single_degenerate_point_raises(self):
        field = ScalarField(
            lambda X, T: X[:, 0] ** 2,
            1,
            dt=lambda X, T: np.zeros_like(T),
            grad=lambda X, T: 2.0 * X,
            hessian=lambda X, T: np.full((X.shape[0], 1, 1), 2.0),
        )
        with pytest.raises(DegenerateGradientError, match="grad u"):
            p_laplacian_at(field, PParams(p=1.5), 0.0, 0.0)

    def test_heat_residual_vanishes(self):
        u = heat_solution()
        params = PParams(p=2)
        assert residual_at(u, params, 0.7, 0.3) == pytest.approx(0.0, abs=1e-12)
        assert residual_at(u, params, 0.7, 0.3, closed_form=False) == pytest.approx(0.0, abs=1e-5)

    def test_multiplier_scales_time_derivative(self):
        assert residual_at(linear_in_time(), PParams(p=3, a=8.0), 0.5, 0.5) == pytest.approx(8.0)

    def test_closed_form_matches_finite_differences(self):
        family = make_psi_family(PParams(p=3, n=2), diam_theta=1.0)
        w = family.member(2)
        X = np.array([[0.2, -0.1], [0.05, 0.25]])
        T = np.array([0.3, 0.5])
        exact = evaluate_operator(w, family.params, X, T)
        approx = evaluate_operator(w, family.params, X, T, closed_form=False)
        np.testing.assert_allclose(approx.p_laplacian, exact.p_laplacian, rtol=1e-4)
        np.testing.assert_allclose(approx.residual, exact.residual, rtol=1e-4)


class TestCertify:
    """Test sampled certification."""

    def test_exact_solution(self, unit_box):
        report = certify(heat_solution(), PParams(p=2), unit_box, samples=400, sense="solution")
        assert report.passed
        assert report.points_sampled == 400
        assert report.passes == 400
        assert report.worst_point is None

    def test_wrong_sense_is_reported(self, unit_box):
        params = PParams(p=3)
        report = certify(linear_in_time(), params, unit_box, samples=100, sense="sub")
        assert not report.passed
        assert report.violations == 100
        assert report.min_residual == pytest.approx(1.0, abs=1e-6)
        assert len(report.worst_point) == 2
        assert certify(linear_in_time(), params, unit_box, samples=100).passed

    def test_large_terms_do_not_hide_a_violation(self, unit_box):
        """Two cancelling 2e8 terms leave a residual of −0.5 that must be reported."""
        big = ScalarField(
            lambda X, T: 1e8 * X[:, 0] ** 2 + (2e8 - 0.5) * T,
            1,
            dt=lambda X, T: np.full_like(T, 2e8 - 0.5),
            grad=lambda X, T: (2e8 * X[:, 0])[:, None],
            hessian=lambda X, T: np.full((X.shape[0], 1, 1), 2e8),
            label="cancelling",
        )
        report = certify(big, PParams(p=2), unit_box, samples=200)

        assert not report.passed
        assert report.violations == report.points_sampled == 200
        assert report.min_residual == pytest.approx(-0.5, abs=1e-6)
        assert report.max_scale >= 2e8

    def test_per_point_records(self, unit_box):
        report = certify(heat_solution(), PParams(p=2), unit_box, samples=50, per_point=True)
        assert len(report.records) == 50
        assert {r.status for r in report.records} == {"pass"}
        assert len(report.records[0].x) == 1

    def test_degenerate_points_are_excluded(self, unit_box):
        flat = ScalarField(
            lambda X, T: np.zeros_like(T),
            1,
            dt=lambda X, T: np.zeros_like(T),
            grad=lambda X, T: np.zeros_like(X),
            hessian=lambda X, T: np.ones((X.shape[0], 1, 1)),
            label="flat",
        )
        report = certify(flat, PParams(p=1.5), unit_box, samples=100)
        assert report.excluded_degenerate == 100
        assert report.excluded_fraction == 1.0
        assert report.violations == 0

    def test_seed_reproducibility(self, unit_box):
        a = certify(heat_solution(), PParams(p=2), unit_box, samples=100, seed=7)
        b = certify(heat_solution(), PParams(p=2), unit_box, samples=100, seed=7)
        assert a.min_residual == b.min_residual
        assert a.max_residual == b.max_residual

    def test_workers_agree(self, unit_box):
        serial = certify(heat_solution(), PParams(p=2), unit_box, samples=200)
        threaded = certify(heat_solution(), PParams(p=2), unit_box, samples=200, workers=4)
        assert serial.min_residual == threaded.min_residual
        assert serial.passes == threaded.passes

    def test_empty_sample(self, unit_box):
        report = certify(heat_solution(), PParams(p=2), unit_box, samples=10, step=1.0)
        assert report.points_sampled == 0
        assert not report.passed


class TestWeakForm:
    """Test the weak-form functional."""

    def test_mollifier_support(self):
        bump = MollifierBump(BoundingBox(lower=(0.0, 0.0), upper=(1.0, 1.0)))
        Y = np.array([[0.5, 0.5], [1.5, 0.5], [1.0, 0.5]])
        values = bump.value(Y)
        assert values[0] == pytest.approx(np.exp(-2.0))
        assert values[1] == 0.0
        assert values[2] == 0.0

    def test_solution_and_supersolution(self):
        box = ((0.0, 0.0), (1.0, 1.0))
        params = PParams(p=2)
        solution = weak_form_check(heat_solution(), params, box)
        super_value = weak_form_check(linear_in_time(), params, box)
        assert super_value > 0
        assert abs(solution) < 1e-2 * super_value

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="spatial axes"):
            weak_form_check(heat_solution(), PParams(p=2), ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)))
