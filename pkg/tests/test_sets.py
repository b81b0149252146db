"""Normotope membership, hulls, volume cost, H-rep, and sampling."""

import numpy as np
import pytest

from normotopes.errors import (
    DimensionMismatch,
    DimensionTooLarge,
    SingularShape,
    UnsupportedKind,
)
from normotopes.norms import NormKind
from normotopes.sets import (
    Normotope,
    contains,
    interval_hull,
    membership_margins,
    sample,
    to_hrep,
    volume_cost,
)

KINDS = [NormKind.L1, NormKind.L2, NormKind.LINF]


def box(n=2, y=1.0):
    return Normotope(NormKind.LINF, np.zeros(n), np.eye(n), y)


class TestContains:
    @pytest.mark.parametrize("kind", KINDS)
    def test_center_always_inside(self, kind):
        rng = np.random.default_rng(0)
        n = Normotope(kind, rng.standard_normal(3),
                      np.eye(3) + 0.1 * rng.standard_normal((3, 3)), 0.5)
        assert contains(n, n.center, 0.0)

    def test_unit_box_boundary(self):
        n = box()
        assert contains(n, np.array([1.0, 0.0]), 0.0)
        assert not contains(n, np.array([1.001, 0.0]), 0.0)

    def test_l2_scaled_axes(self):
        n = Normotope(NormKind.L2, np.zeros(2), np.diag([2.0, 1.0]), 1.0)
        assert contains(n, np.array([0.5, 0.0]), 0.0)
        assert not contains(n, np.array([0.51, 0.0]), 0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            contains(box(), np.zeros(3), 0.0)


class TestIntervalHull:
    def test_identity_box(self):
        hull = interval_hull(box())
        assert np.allclose(hull.lo, [-1, -1]) and np.allclose(hull.hi, [1, 1])

    def test_l2_ellipse_extents(self):
        n = Normotope(NormKind.L2, np.zeros(2), np.diag([2.0, 1.0]), 1.0)
        hull = interval_hull(n)
        assert np.allclose(hull.lo, [-0.5, -1.0])
        assert np.allclose(hull.hi, [0.5, 1.0])

    def test_l1_cross_polytope_box(self):
        n = Normotope(NormKind.L1, np.zeros(2), np.eye(2), 1.0)
        hull = interval_hull(n)
        assert np.allclose(hull.lo, [-1, -1]) and np.allclose(hull.hi, [1, 1])

    @pytest.mark.parametrize("kind", KINDS)
    def test_hull_contains_samples(self, kind):
        rng = np.random.default_rng(1)
        n = Normotope(kind, rng.standard_normal(3),
                      rng.standard_normal((3, 3)) + 3 * np.eye(3), 0.8)
        pts = sample(n, 7, 10_000)
        hull = interval_hull(n)
        assert np.all(pts >= hull.lo - 1e-9)
        assert np.all(pts <= hull.hi + 1e-9)

    def test_singular_shape_rejected(self):
        n = Normotope(NormKind.L2, np.zeros(2),
                      np.array([[1.0, 1.0], [1.0, 1.0 + 1e-15]]), 1.0)
        with pytest.raises(SingularShape):
            interval_hull(n)


class TestVolumeCost:
    def test_identity(self):
        n = Normotope(NormKind.L2, np.zeros(2), np.eye(2), 1.0)
        assert volume_cost(n) == pytest.approx(0.0, abs=1e-14)

    def test_doubled_identity(self):
        n = Normotope(NormKind.L2, np.zeros(2), 2.0 * np.eye(2), 1.0)
        assert volume_cost(n) == pytest.approx(-np.log(16.0), abs=1e-12)

    def test_against_determinant_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            alpha = rng.standard_normal((3, 3)) + 4 * np.eye(3)
            n = Normotope(NormKind.L2, np.zeros(3), alpha, 0.5)
            oracle = -np.log(np.linalg.det(alpha) ** 2) + 6 * np.log(0.5)
            assert volume_cost(n) == pytest.approx(oracle, rel=1e-10)

    def test_shift_invariance(self):
        rng = np.random.default_rng(3)
        alpha = rng.standard_normal((3, 3)) + 3 * np.eye(3)
        a = Normotope(NormKind.L2, np.zeros(3), alpha, 0.7)
        b = Normotope(NormKind.L2, rng.standard_normal(3), alpha, 0.7)
        assert volume_cost(a) == volume_cost(b)

    def test_scaling_invariance(self):
        rng = np.random.default_rng(4)
        alpha = rng.standard_normal((3, 3)) + 3 * np.eye(3)
        base = Normotope(NormKind.L2, np.zeros(3), alpha, 0.7)
        for c in (0.1, 2.0, 37.5):
            scaled = Normotope(NormKind.L2, np.zeros(3), c * alpha, c * 0.7)
            assert volume_cost(scaled) == pytest.approx(volume_cost(base),
                                                        abs=1e-12)


class TestHrep:
    def test_unit_box(self):
        poly = to_hrep(box())
        assert np.allclose(poly.H, [[1, 0], [0, 1], [-1, 0], [0, -1]])
        assert np.allclose(poly.b, [1, 1, 1, 1])

    def test_shifted_scaled_box(self):
        n = Normotope(NormKind.LINF, np.array([1.0, 0.0]),
                      np.array([[2.0, 0.0], [0.0, 1.0]]), 1.0)
        poly = to_hrep(n)
        assert np.allclose(poly.b, [3.0, 1.0, -1.0, 1.0])

    def test_l1_cross_polytope(self):
        n = Normotope(NormKind.L1, np.zeros(2), np.eye(2), 1.0)
        poly = to_hrep(n)
        # half-spaces +-x1 +- x2 <= 1 (each listed twice by construction)
        signs = {tuple(row) for row in poly.H}
        assert signs == {(1, 1), (1, -1), (-1, 1), (-1, -1)}
        assert np.allclose(poly.b, 1.0)

    def test_l2_unsupported(self):
        n = Normotope(NormKind.L2, np.zeros(2), np.eye(2), 1.0)
        with pytest.raises(UnsupportedKind):
            to_hrep(n)

    def test_l1_dimension_cap(self):
        n = Normotope(NormKind.L1, np.zeros(11), np.eye(11), 1.0)
        with pytest.raises(DimensionTooLarge):
            to_hrep(n)

    @pytest.mark.parametrize("kind", [NormKind.LINF, NormKind.L1])
    def test_membership_equivalence(self, kind):
        rng = np.random.default_rng(5)
        n = Normotope(kind, rng.standard_normal(2),
                      rng.standard_normal((2, 2)) + 2 * np.eye(2), 0.9)
        poly = to_hrep(n)
        for _ in range(1000):
            x = n.center + rng.uniform(-1.5, 1.5, 2)
            assert contains(n, x, 0.0) == poly.contains(x, 1e-9)


class TestSample:
    @pytest.mark.parametrize("kind", KINDS)
    def test_samples_inside(self, kind):
        rng = np.random.default_rng(6)
        n = Normotope(kind, rng.standard_normal(3),
                      rng.standard_normal((3, 3)) + 3 * np.eye(3), 1.3)
        pts = sample(n, 11, 2000)
        assert np.all(membership_margins(n, pts) <= 1e-9)

    def test_deterministic_for_seed(self):
        n = box(3)
        assert np.array_equal(sample(n, 42, 64), sample(n, 42, 64))

    def test_tiny_offset_collapses_to_center(self):
        n = Normotope(NormKind.L2, np.array([2.0, -1.0]), np.eye(2), 1e-12)
        pts = sample(n, 0, 32)
        assert np.all(np.abs(pts - n.center) <= 1e-9)

    def test_unit_box_mean(self):
        pts = sample(box(), 123, 10_000)
        assert np.all(np.abs(pts.mean(axis=0)) < 0.05)

    def test_rejects_bad_count(self):
        with pytest.raises(ValueError):
            sample(box(), 0, 0)


class TestNormotopeType:
    def test_offset_must_be_positive(self):
        with pytest.raises(ValueError):
            Normotope(NormKind.L2, np.zeros(2), np.eye(2), 0.0)

    def test_json_round_trip(self):
        rng = np.random.default_rng(8)
        n = Normotope(NormKind.L1, rng.standard_normal(2),
                      rng.standard_normal((2, 2)) + 2 * np.eye(2), 0.4)
        back = Normotope.from_json(n.to_json())
        assert back.kind is n.kind
        assert np.array_equal(back.center, n.center)
        assert np.array_equal(back.shape, n.shape)
        assert back.offset == n.offset
