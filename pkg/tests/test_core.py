"""Tests for the core parameter, field and family abstractions."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from pbarrier.core import (
    BarrierFamily,
    NonFiniteError,
    ParameterError,
    PParams,
    ScalarField,
    SpaceTimePoint,
    constant_field,
    field_from_closure,
    lambda_of,
)
from pbarrier.geometry.domains import make_domain


def quadratic_field(n: int = 1) -> ScalarField:
    """u(x, t) = |x|² + t, derivatives left to finite differences."""
    return ScalarField(lambda X, T: np.sum(X**2, axis=1) + T, n, label="quadratic")


class TestPParams:
    """Test the equation parameter model."""

    def test_lambda(self):
        assert PParams(p=3, n=1).lambda_() == 4.0
        assert PParams(p=1.5, n=2).lambda_() == pytest.approx(0.5)
        assert lambda_of(PParams(p=2, n=3)) == 2.0

    @given(
        p=st.floats(min_value=1.01, max_value=10.0),
        n=st.integers(min_value=1, max_value=6),
    )
    def test_lambda_is_affine_in_n(self, p, n):
        step = PParams(p=p, n=n + 1).lambda_() - PParams(p=p, n=n).lambda_()
        assert step == pytest.approx(p - 2.0, abs=1e-12)

    def test_rejects_p_at_most_one(self):
        with pytest.raises(ValidationError):
            PParams(p=1.0)

    def test_rejects_nonpositive_multiplier(self):
        with pytest.raises(ValidationError):
            PParams(p=3, a=0.0)

    def test_requires_p_not_two(self):
        PParams(p=3).requires_p_not_two("scaling")
        with pytest.raises(ParameterError, match="requires p != 2"):
            PParams(p=2).requires_p_not_two("scaling")

    def test_with_multiplier_returns_new_model(self):
        base = PParams(p=3, n=2)
        scaled = base.with_multiplier(8.0)
        assert scaled.a == 8.0
        assert base.a == 1.0
        assert scaled.n == 2

    def test_regime_flags(self):
        assert PParams(p=3).is_degenerate
        assert PParams(p=1.5).is_singular
        assert not PParams(p=2).is_degenerate


class TestSpaceTimePoint:
    """Test space-time points."""

    def test_scalar_x_is_coerced(self):
        point = SpaceTimePoint(x=0.5, t=-1.0)
        assert point.x == (0.5,)
        assert point.n == 1

    def test_distance(self):
        a = SpaceTimePoint(x=(0.0, 0.0), t=0.0)
        b = SpaceTimePoint(x=(3.0, 0.0), t=4.0)
        assert a.distance_to(b) == 5.0

    def test_check_dimension(self):
        with pytest.raises(ParameterError, match="parameters declare n=2"):
            SpaceTimePoint(x=(0.0,), t=0.0).check_dimension(PParams(p=3, n=2))

    def test_origin(self):
        assert SpaceTimePoint.origin(3) == SpaceTimePoint(x=(0, 0, 0), t=0)


class TestScalarField:
    """Test vectorised evaluation and finite-difference derivatives."""

    def test_single_point_and_batch(self):
        u = quadratic_field()
        assert u(0.5, 1.0) == pytest.approx(1.25)
        X = np.array([[0.0], [1.0]])
        T = np.array([0.0, 2.0])
        np.testing.assert_allclose(u(X, T), [0.0, 3.0])

    def test_fd_derivatives(self):
        u = quadratic_field(n=2)
        x = np.array([0.3, -0.2])
        assert u.time_derivative(x, 0.5) == pytest.approx(1.0, abs=1e-6)
        np.testing.assert_allclose(u.gradient(x, 0.5), [0.6, -0.4], atol=1e-6)
        np.testing.assert_allclose(u.hessian(x, 0.5), 2.0 * np.eye(2), atol=1e-3)

    def test_closed_form_is_preferred(self):
        u = ScalarField(
            lambda X, T: X[:, 0] ** 2,
            1,
            dt=lambda X, T: np.full(T.shape, 7.0),
            grad=lambda X, T: 2 * X,
            hessian=lambda X, T: np.full((X.shape[0], 1, 1), 2.0),
        )
        assert u.has_closed_form
        assert u.time_derivative(0.1, 0.0) == 7.0
        assert u.time_derivative(0.1, 0.0, closed_form=False) == pytest.approx(0.0, abs=1e-8)

    def test_one_sided_stencil_near_domain_edge(self):
        box = make_domain({"kind": "box", "lower": [0.0], "upper": [1.0]})

        def value(X, T):
            x = X[:, 0]
            return np.where(x >= 0, x**2, np.nan)

        u = ScalarField(value, 1, domain=box)
        x = 2e-6
        assert u.gradient(x, 0.5) == pytest.approx(2 * x, abs=1e-9)
        assert np.isfinite(u.hessian(x, 0.5))

    def test_scaled_scales_derivatives(self):
        u = quadratic_field().scaled(3.0)
        assert u(1.0, 0.0) == pytest.approx(3.0)
        assert u.gradient(1.0, 0.0) == pytest.approx(6.0, abs=1e-5)

    def test_constant_field(self):
        c = constant_field(2.5, 2)
        x = np.array([0.1, 0.2])
        assert c(x, 0.0) == 2.5
        np.testing.assert_array_equal(c.gradient(x, 0.0), [0.0, 0.0])
        np.testing.assert_array_equal(c.hessian(x, 0.0), np.zeros((2, 2)))

    def test_field_from_closure_probe_points(self):
        with pytest.raises(NonFiniteError, match="non-finite value"):
            field_from_closure(
                lambda X, T: 1.0 / X[:, 0],
                1,
                probe_points=(np.array([[0.0], [1.0]]), np.array([0.0, 0.0])),
                label="reciprocal",
            )

    def test_rejects_zero_dimension(self):
        with pytest.raises(ParameterError, match="spatial dimension"):
            ScalarField(lambda X, T: T, 0)


@pytest.fixture
def toy_family():
    """A family w_j = j·|x| on a box with gauge |x|."""
    params = PParams(p=3, n=1)
    domain = make_domain({"kind": "box", "lower": [-1.0], "upper": [1.0], "t1": -1.0, "t2": 0.0})

    def member(j):
        return ScalarField(lambda X, T: j * np.abs(X[:, 0]), 1, label=f"toy[{j}]")

    return BarrierFamily(
        "toy",
        params,
        member,
        lambda X, T: np.abs(X[:, 0]),
        3,
        domain,
        SpaceTimePoint.origin(1),
        constants={"slope": 1.0},
    )


class TestBarrierFamily:
    """Test the indexed family wrapper."""

    def test_member_below_j_min(self, toy_family):
        with pytest.raises(ParameterError, match="below j_min=3"):
            toy_family.member(2)

    def test_member_is_cached(self, toy_family):
        assert toy_family.member(5) is toy_family.member(5)

    def test_ladder(self, toy_family):
        assert toy_family.ladder() == [3, 6, 30]

    def test_default_index_for_gauge(self, toy_family):
        assert toy_family.index_for_gauge(1) == 3
        assert toy_family.index_for_gauge(7.5) == math.ceil(7.5)

    def test_calibration_embeds_constants(self, toy_family):
        data = toy_family.calibration(4)
        assert data == {"family": "toy", "j": 4, "j_min": 3, "slope": 1.0}

    def test_gauge_batch(self, toy_family):
        np.testing.assert_allclose(
            toy_family.gauge(np.array([[-0.5], [0.25]]), np.array([-0.5, -0.5])), [0.5, 0.25]
        )
