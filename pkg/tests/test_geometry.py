"""Tests for domain constructors, rasterization, sampling and parabolic boundaries."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbarrier.barriers.calibration import petrovskii_width
from pbarrier.core import ParameterError, SpaceTimePoint
from pbarrier.geometry import (
    Cylinder,
    make_domain,
    parabolic_boundary,
    parse_domain_spec,
    rasterize,
    sample_domain,
    sample_near,
)


@pytest.fixture
def petrovskii():
    return make_domain({"kind": "petrovskii", "K": 1.0, "alpha": 1.0, "p": 3.0, "n": 1})


class TestNamedDomains:
    """Test that every construction evaluates its defining inequality."""

    def test_petrovskii_literal_inequality(self, petrovskii):
        x, t = 0.01, -0.1
        lhs = (x / (-t) ** 0.25) ** 1.5
        rhs = (-t) ** 0.25 * (abs(math.log(-t)) - 1.0)
        assert petrovskii.contains(x, t) == (lhs < rhs)
        assert petrovskii.contains(x, t)

    def test_petrovskii_time_window(self, petrovskii):
        assert not petrovskii.contains(0.0, -0.2)
        assert not petrovskii.contains(0.0, 0.0)

    def test_singular_final(self):
        domain = make_domain({"kind": "singular_final", "K": 2.0, "l": 1.0, "p": 1.5})
        assert domain.contains(0.1, -0.1)
        assert not domain.contains(0.3, -0.1)

    def test_horizontal_cone_1d(self):
        domain = make_domain({"kind": "cone_1d", "gamma": 1.0, "orientation": "horizontal"})
        assert not domain.contains(1.0, 0.5)
        assert not domain.contains(0.5, -0.25)
        assert domain.contains(-0.5, -0.25)

    def test_downward_cone_1d(self):
        domain = make_domain({"kind": "cone_1d", "gamma": 1.0, "orientation": "downward"})
        assert not domain.contains(0.1, -0.5)
        assert domain.contains(0.6, -0.5)
        assert domain.contains(-0.6, -0.5)

    def test_horizontal_cone_complement(self):
        domain = make_domain(
            {"kind": "horizontal_cone_complement", "theta": 2.0, "v": [1.0, 0.0], "r": 1.0}
        )
        assert not domain.contains([0.5, 0.0], -0.1)
        assert domain.contains([-0.5, 0.0], -0.1)

    def test_ball_complement(self):
        domain = make_domain(
            {
                "kind": "ball_complement",
                "center": [1.0, 0.0],
                "box_lower": [-1.0, -1.0],
                "box_upper": [1.0, 1.0],
            }
        )
        assert not domain.contains(0.9, 0.0)
        assert domain.contains(-0.5, 0.0)

    def test_ball_complement_requires_origin_on_sphere(self):
        with pytest.raises(ParameterError, match="origin on the sphere"):
            make_domain(
                {
                    "kind": "ball_complement",
                    "center": [1.0, 0.0],
                    "radius": 0.5,
                    "box_lower": [-1.0, -1.0],
                    "box_upper": [1.0, 1.0],
                }
            )

    def test_north_pole(self):
        domain = make_domain({"kind": "north_pole", "theta": 1.0, "l": 4.0})
        assert domain.contains(0.9, -0.5)
        assert not domain.contains(0.5, -0.5)

    def test_tusk(self):
        domain = make_domain({"kind": "tusk", "x0": [1.0], "R": 0.5, "T": 1.0})
        assert domain.contains(0.5, -0.25)
        assert not domain.contains(-0.5, -0.25)

    def test_barenblatt_ball_shrinks_to_origin(self):
        domain = make_domain({"kind": "barenblatt_ball", "p": 3.0, "T": 0.01})
        y_early = domain.radial_extent(np.array([-0.01]))[0]
        y_late = domain.radial_extent(np.array([-1e-4]))[0]
        assert y_late < y_early
        assert domain.contains(0.0, -0.005)

    def test_contains_is_false_outside_bbox(self, petrovskii):
        hi = petrovskii.bbox.upper[0]
        assert not petrovskii.contains(2 * hi, -0.1)

    @pytest.mark.parametrize(
        "spec, message",
        [
            ({"kind": "petrovskii", "p": 2.0}, "requires p > 2"),
            ({"kind": "singular_final", "p": 2.5}, "requires 1 < p < 2"),
            ({"kind": "singular_final", "p": 1.5, "l": 1.6}, "requires 0 < l < p"),
            ({"kind": "barenblatt_ball", "p": 1.5}, "requires p > 2"),
            ({"kind": "singular_supercritical", "p": 1.2, "n": 2}, "2n/\\(n\\+1\\) < p < 2"),
        ],
    )
    def test_rejected_parameters(self, spec, message):
        with pytest.raises(ParameterError, match=message):
            make_domain(spec)

    def test_unknown_kind_suggests(self):
        with pytest.raises(ParameterError, match="did you mean 'petrovskii'"):
            make_domain({"kind": "petrovski"})

    def test_spec_round_trip(self):
        spec = parse_domain_spec({"kind": "cylinder", "lower": [0.0], "upper": [2.0], "T": 0.5})
        again = parse_domain_spec(spec.model_dump())
        assert again == spec

    def test_restrict_to_ball(self, petrovskii):
        local = petrovskii.restrict_to_ball(SpaceTimePoint(x=(0.0,), t=0.0), 0.05)
        assert local.contains(0.0, -0.01)
        assert not local.contains(0.0, -0.1)
        assert local.bbox.lower[-1] >= -0.05


class TestRasterize:
    """Test rasterization and boundary classification."""

    def test_unit_box_counts(self):
        box = make_domain({"kind": "box", "lower": [0.0], "upper": [1.0]})
        mask = rasterize(box, 0.5, 2)
        assert mask.num_levels == 2
        assert int(mask.active.sum()) == 4
        assert mask.components(0) == 1

    def test_final_time_classification(self):
        box = make_domain({"kind": "box", "lower": [0.0], "upper": [1.0]})
        mask = rasterize(box, 0.5, 2)
        assert mask.exposed_cells(1) == [((1,), "final-time"), ((2,), "final-time")]
        assert [label for _, label in mask.exposed_cells(0)] == ["lateral/earlier"] * 2

    def test_downward_cone_has_no_cells_in_cone(self):
        domain = make_domain({"kind": "cone_1d", "gamma": 1.0, "orientation": "downward"})
        mask = rasterize(domain, 1.0 / 16, 4)
        centers = mask.centers()[..., 0]
        for k, tm in enumerate(mask.level_midpoints):
            assert np.all(np.abs(centers[mask.active[k]]) > -tm)
        assert mask.components(2) == 2

    def test_petrovskii_width_matches_analytic(self, petrovskii):
        h = 1e-3
        mask = rasterize(petrovskii, h, [-0.1005, -0.0995])
        centers = mask.centers()[..., 0]
        half_width = float(np.max(np.abs(centers[mask.active[0]])))
        assert abs(half_width - petrovskii_width(1.0, 1.0, 3.0, 1, -0.1)) <= h

    @settings(max_examples=10, deadline=None)
    @given(h=st.floats(min_value=1.0 / 64, max_value=0.25), levels=st.integers(1, 6))
    def test_active_cells_are_inside(self, h, levels):
        domain = make_domain({"kind": "singular_final", "K": 2.0, "l": 1.0, "p": 1.5})
        mask = rasterize(domain, h, levels)
        centers = mask.flat_centers()
        for k, tm in enumerate(mask.level_midpoints):
            active = mask.active[k].ravel()
            T = np.full(int(active.sum()), tm)
            assert np.all(domain.contains_points(centers[active], T))

    def test_empty_mask(self):
        domain = make_domain({"kind": "box", "lower": [0.0], "upper": [1.0]})
        mask = rasterize(domain, 0.5, [2.0, 3.0])
        assert mask.is_empty

    def test_checksum(self):
        box = make_domain({"kind": "box", "lower": [0.0], "upper": [1.0]})
        assert rasterize(box, 0.25, 2).checksum() == rasterize(box, 0.25, 2).checksum()
        assert rasterize(box, 0.25, 2).checksum() != rasterize(box, 0.125, 2).checksum()

    def test_rows(self):
        box = make_domain({"kind": "box", "lower": [0.0], "upper": [1.0]})
        rows = list(rasterize(box, 0.5, 2).rows())
        assert len(rows) == 4
        assert rows[0] == [0, 1, 1, 1, 0]

    def test_invalid_partition(self):
        box = make_domain({"kind": "box", "lower": [0.0], "upper": [1.0]})
        with pytest.raises(ParameterError, match="strictly increasing"):
            rasterize(box, 0.5, [0.5, 0.2])
        with pytest.raises(ParameterError, match="must be positive"):
            rasterize(box, 0.0, 2)


class TestSampling:
    """Test reproducible domain sampling."""

    def test_points_are_inside_and_seeded(self, petrovskii):
        X, T = sample_domain(petrovskii, 200, seed=3)
        assert X.shape == (200, 1)
        assert np.all(petrovskii.contains_points(X, T))
        X2, T2 = sample_domain(petrovskii, 200, seed=3)
        np.testing.assert_array_equal(X, X2)
        np.testing.assert_array_equal(T, T2)

    def test_margin(self):
        box = make_domain({"kind": "box", "lower": [0.0], "upper": [1.0]})
        X, T = sample_domain(box, 100, margin=0.1)
        assert np.all((X[:, 0] > 0.1) & (X[:, 0] < 0.9))
        assert np.all((T > 0.1) & (T < 0.9))

    def test_sample_near_in_cusp(self, petrovskii):
        center = SpaceTimePoint(x=(0.0,), t=0.0)
        X, T = sample_near(petrovskii, center, 0.01, 50)
        assert X.shape[0] > 0
        assert np.all(petrovskii.contains_points(X, T))
        assert np.all(X[:, 0] ** 2 + T**2 < 0.01**2)


class TestParabolicBoundary:
    """Test the parabolic boundary of finite unions of cylinders."""

    def test_single_cylinder(self):
        bd = parabolic_boundary([((0.0,), (1.0,), 0.0, 1.0)])
        assert not bd(0.5, 1.0)
        assert bd(0.0, 0.5)
        assert bd(0.5, 0.0)
        assert bd(1.0, 1.0)
        assert not bd(0.5, 0.5)

    def test_union_counterexample(self):
        xi = parabolic_boundary(
            [Cylinder(lower=(0.0,), upper=(3.0,), t1=0.0, t2=1.0), ((1.0,), (2.0,), 0.0, 2.0)]
        )
        assert xi(1.0, 1.5)
        assert not xi(1.5, 1.0)
        assert xi(1.0, 1.0)
        assert xi(2.0, 1.0)
        assert not xi(0.5, 1.0)

    def test_dimension_mismatch(self):
        bd = parabolic_boundary([((0.0,), (1.0,), 0.0, 1.0)])
        with pytest.raises(ParameterError, match="expected 1 spatial"):
            bd([0.0, 0.0], 0.5)

    def test_empty_union(self):
        with pytest.raises(ParameterError, match="at least one cylinder"):
            parabolic_boundary([])
