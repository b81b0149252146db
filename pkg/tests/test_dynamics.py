"""Vector fields: exact Jacobians and interval-Jacobian enclosures."""

import numpy as np
import pytest

from normotopes.dynamics import ldi_corners, ltv, robot_arm, vanderpol
from normotopes.errors import AnchorOutsideBox, CornerBudgetExceeded
from normotopes.intervals import IntervalVector, interval_matvec


def central_jacobian(sys, t, x, eps=1e-6):
    n = x.shape[0]
    out = np.zeros((sys.n_x, n))
    for j in range(n):
        dx = np.zeros(n)
        dx[j] = eps * max(1.0, abs(x[j]))
        out[:, j] = (sys.eval(t, x + dx) - sys.eval(t, x - dx)) / (2 * dx[j])
    return out


def residual_inside_ldi(sys, t, x_box, w_box, anchor, samples, rng):
    """Check the residual inclusion f(z) - f(anchor) in [M](z - anchor)."""
    ld = ldi_corners(sys, t, x_box, w_box, anchor, 256)
    mat = sys.interval_jac(t, x_box.concat(w_box), anchor)
    f_anchor = sys.eval(t, anchor[:sys.n_x],
                        anchor[sys.n_x:] if sys.n_w else None)
    ok = True
    for _ in range(samples):
        x = rng.uniform(x_box.lo, x_box.hi)
        if sys.n_w:
            w = rng.uniform(w_box.lo, w_box.hi)
            z = np.concatenate([x, w])
            resid = sys.eval(t, x, w) - f_anchor
        else:
            z = x
            resid = sys.eval(t, x) - f_anchor
        delta = IntervalVector.from_point(z - anchor)
        bound = interval_matvec(mat, delta)
        ok &= bool(np.all(resid >= bound.lo - 1e-9)
                   and np.all(resid <= bound.hi + 1e-9))
    assert ld.mx.shape[1] == sys.n_x
    return ok


class TestSystems:
    def test_vanderpol_eval(self):
        sys = vanderpol(1.0)
        assert np.allclose(sys.eval(0.0, np.array([-2.0, 0.0])), [0.0, 2.0])

    def test_vanderpol_jacobian(self):
        sys = vanderpol(1.0)
        jac = sys.jac_x(0.0, np.array([-2.0, 0.0]))
        assert np.allclose(jac, [[0.0, 1.0], [-1.0, -3.0]])

    def test_zero_ltv_field(self):
        sys = ltv(np.zeros((3, 3)))
        rng = np.random.default_rng(0)
        for _ in range(10):
            assert np.allclose(sys.eval(1.0, rng.standard_normal(3)), 0.0)

    def test_eval_broadcasts(self):
        sys = robot_arm()
        rng = np.random.default_rng(1)
        batch = rng.standard_normal((17, 4)) + np.array([1.5, 0.75, 0, 0])
        out = sys.eval(0.0, batch)
        assert out.shape == (17, 4)
        for i in range(17):
            assert np.allclose(out[i], sys.eval(0.0, batch[i]))

    @pytest.mark.parametrize("factory", [
        lambda: vanderpol(1.0),
        lambda: robot_arm(),
        lambda: ltv(lambda t: np.array([[np.sin(t), 1.0], [-1.0, -0.5]])),
    ])
    def test_jac_vs_finite_differences(self, factory):
        sys = factory()
        rng = np.random.default_rng(2)
        base = np.array([1.5, 0.75, 0.0, 0.0])[: sys.n_x]
        for _ in range(100):
            x = base + 0.5 * rng.standard_normal(sys.n_x)
            jac = sys.jac_x(0.3, x)
            fd = central_jacobian(sys, 0.3, x)
            scale = max(1.0, np.abs(fd).max())
            assert np.abs(jac - fd).max() / scale <= 1e-5


class TestIntervalJacobian:
    def test_ltv_is_singleton(self):
        a = np.array([[0.0, 1.0], [-1.0, 0.0]])
        sys = ltv(a)
        box = IntervalVector(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
        ld = ldi_corners(sys, 0.0, box, IntervalVector.empty(),
                         np.zeros(2), 256)
        assert ld.mx.shape == (1, 2, 2)
        assert np.allclose(ld.mx[0], a)
        assert ld.mw.shape == (1, 2, 0)

    def test_vanderpol_sequential_entries(self):
        # anchored at (-2, 0): the (1,0) partial -1 - 2 x1 x2 only sees the
        # x1 interval with x2 pinned at 0, so it stays the singleton -1;
        # the (1,1) partial 1 - x1^2 ranges over [-3.41, -2.61]
        sys = vanderpol(1.0)
        box = IntervalVector(np.array([-2.1, -0.1]), np.array([-1.9, 0.1]))
        mat = sys.interval_jac(0.0, box, np.array([-2.0, 0.0]))
        assert mat.entry(1, 0).lo == pytest.approx(-1.0)
        assert mat.entry(1, 0).hi == pytest.approx(-1.0)
        assert mat.entry(1, 1).lo == pytest.approx(-3.41)
        assert mat.entry(1, 1).hi == pytest.approx(-2.61)
        ld = ldi_corners(sys, 0.0, box, IntervalVector.empty(),
                         np.array([-2.0, 0.0]), 256)
        assert ld.mx.shape[0] == 2

    def test_vanderpol_residual_inclusion(self):
        sys = vanderpol(1.0)
        box = IntervalVector(np.array([-2.1, -0.1]), np.array([-1.9, 0.1]))
        rng = np.random.default_rng(3)
        assert residual_inside_ldi(sys, 0.0, box, IntervalVector.empty(),
                                   np.array([-2.0, 0.0]), 1000, rng)

    def test_robot_arm_residual_inclusion(self):
        sys = robot_arm()
        center = np.array([1.5, 0.75, 0.0, 0.0])
        box = IntervalVector(center - 0.1, center + 0.1)
        rng = np.random.default_rng(4)
        assert residual_inside_ldi(sys, 0.0, box, IntervalVector.empty(),
                                   center, 1000, rng)

    def test_robot_arm_corner_count(self):
        # with the rates anchored at zero, exactly four entries stay
        # interval-valued, giving 2^4 = 16 corners
        sys = robot_arm()
        center = np.array([1.5, 0.75, 0.0, 0.0])
        box = IntervalVector(center - 0.1, center + 0.1)
        ld = ldi_corners(sys, 0.0, box, IntervalVector.empty(), center, 256)
        assert ld.mx.shape[0] == 16

    def test_disturbed_residual_inclusion(self):
        sys = ltv(np.array([[0.0, 1.0], [-1.0, -0.5]]),
                  g=np.array([[1.0], [0.5]]))
        box = IntervalVector(np.array([-0.2, -0.2]), np.array([0.2, 0.2]))
        w_box = IntervalVector(np.array([-0.3]), np.array([0.1]))
        rng = np.random.default_rng(5)
        assert residual_inside_ldi(sys, 0.0, box, w_box,
                                   np.array([0.0, 0.0, -0.1]), 500, rng)

    def test_singleton_box_collapses_to_jacobian(self):
        sys = robot_arm()
        x = np.array([1.2, 0.9, 0.3, -0.2])
        box = IntervalVector(x, x.copy())
        mat = sys.interval_jac(0.0, box, x)
        assert np.abs(mat.lo - sys.jac_x(0.0, x)).max() <= 1e-12
        assert np.abs(mat.hi - sys.jac_x(0.0, x)).max() <= 1e-12

    def test_anchor_outside_box(self):
        sys = vanderpol(1.0)
        box = IntervalVector(np.array([-2.1, -0.1]), np.array([-1.9, 0.1]))
        with pytest.raises(AnchorOutsideBox):
            sys.interval_jac(0.0, box, np.array([0.0, 0.0]))

    def test_corner_budget_propagates(self):
        sys = robot_arm()
        center = np.array([1.5, 0.75, 0.1, 0.1])
        box = IntervalVector(center - 0.1, center + 0.1)
        with pytest.raises(CornerBudgetExceeded):
            ldi_corners(sys, 0.0, box, IntervalVector.empty(), center, 2)

    def test_arm_denominator_guard(self):
        # with zero arm mass the inertia denominator can reach zero inside
        # the box, which must be rejected
        sys = robot_arm(M=0.0)
        center = np.array([1.5, 0.0, 0.0, 0.0])
        box = IntervalVector(center - 0.1, center + 0.1)
        with pytest.raises(ZeroDivisionError):
            sys.interval_jac(0.0, box, center)
