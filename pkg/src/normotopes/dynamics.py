"""Vector fields with exact Jacobians and interval-Jacobian enclosures.

Each system hand-codes its Jacobian entries as expressions over generic
scalars, so one code path serves three evaluation modes: plain floats for
the exact Jacobian, dual numbers for Hessian-vector products, and intervals
for the sequential enclosure used to build linear differential inclusions.

The sequential rule evaluates the partials of column j on
(Z_1, ..., Z_j, anchor_{j+1}, ..., anchor_m): coordinates up to and
including j range over their intervals, later ones are pinned to the
anchor. The resulting interval matrix [M] bounds the residual
f(z) - f(anchor) via [M] (z - anchor) for every z in the box, even though
individual Jacobian samples over the box need not lie inside [M].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .duals import dot_of
from .errors import AnchorOutsideBox, DimensionMismatch
from .intervals import Interval, IntervalMatrix, IntervalVector, corner_stack

__all__ = [
    "VectorField",
    "LdiCorners",
    "ldi_corners",
    "robot_arm",
    "vanderpol",
    "ltv",
    "RobotArmParams",
]

ANCHOR_TOL = 1e-9


class VectorField:
    """Base class for C^1 dynamics dx/dt = f(t, x, w).

    Subclasses set n_x and n_w and implement eval() and jac_entries().
    eval broadcasts over leading sample axes. jac_entries takes the stacked
    (x, w) coordinates as a list of scalar-like values (floats, duals, or
    intervals) and returns the n_x x (n_x + n_w) grid of partials as nested
    lists, written with generic arithmetic only.
    """

    n_x: int
    n_w: int = 0
    name: str = "vector-field"

    def eval(self, t, x, w=None):
        raise NotImplementedError

    def jac_entries(self, t, z):
        raise NotImplementedError

    def _jac_grid(self, t, x, w=None):
        z = list(np.asarray(x, dtype=float))
        if self.n_w:
            if w is None:
                w = np.zeros(self.n_w)
            z += list(np.asarray(w, dtype=float))
        return np.array(self.jac_entries(t, z), dtype=float)

    def jac_x(self, t, x, w=None):
        return self._jac_grid(t, x, w)[:, : self.n_x]

    def jac_w(self, t, x, w=None):
        return self._jac_grid(t, x, w)[:, self.n_x:]

    def jac_grid_dual(self, t, z_duals):
        """(values, dots) of the Jacobian grid along a tangent direction."""
        grid = self.jac_entries(t, z_duals)
        dots = np.array([[dot_of(e) for e in row] for row in grid])
        return dots

    def interval_jac(self, t, box: IntervalVector, anchor) -> IntervalMatrix:
        """Interval Jacobian over the box per the sequential-argument rule."""
        anchor = np.asarray(anchor, dtype=float)
        m = self.n_x + self.n_w
        if len(box) != m or anchor.shape != (m,):
            raise DimensionMismatch(
                f"box/anchor of dims {len(box)}/{anchor.shape} vs {m}")
        if not box.contains_point(anchor, tol=ANCHOR_TOL):
            raise AnchorOutsideBox(
                f"anchor {anchor} outside box [{box.lo}, {box.hi}]")
        lo = np.empty((self.n_x, m))
        hi = np.empty((self.n_x, m))
        for j in range(m):
            args = [box[i] for i in range(j + 1)]
            args += [float(anchor[i]) for i in range(j + 1, m)]
            grid = self.jac_entries(t, args)
            for i in range(self.n_x):
                e = grid[i][j]
                if isinstance(e, Interval):
                    lo[i, j] = e.lo
                    hi[i, j] = e.hi
                else:
                    lo[i, j] = hi[i, j] = float(e)
        return IntervalMatrix(lo, hi)


@dataclass
class LdiCorners:
    """Corner matrices of the interval enclosure, split into state and
    disturbance blocks. mx has shape (Kx, n, n), mw has shape (Kw, n, n_w)."""

    mx: np.ndarray
    mw: np.ndarray

    def __post_init__(self):
        if self.mx.shape[0] < 1 or self.mw.shape[0] < 1:
            raise ValueError("corner lists must be nonempty")


def ldi_corners(sys: VectorField, t, x_box: IntervalVector,
                w_box: IntervalVector, anchor, corner_cap: int = 256) -> LdiCorners:
    """Corner matrices bounding f(t,x,w) - f(t,anchor) over the box.

    The guarantee is the residual inclusion
        f(t,x,w) - f(t,x0,w0) in co{mx} (x - x0) + co{mw} (w - w0)
    for every (x, w) in x_box x w_box, with (x0, w0) the anchor.
    """
    box = x_box.concat(w_box)
    mat = sys.interval_jac(t, box, anchor)
    mx = corner_stack(mat.columns(slice(0, sys.n_x)), corner_cap)
    if sys.n_w:
        mw = corner_stack(mat.columns(slice(sys.n_x, None)), corner_cap)
    else:
        mw = np.zeros((1, sys.n_x, 0))
    return LdiCorners(mx=mx, mw=mw)


# -- shipped systems ----------------------------------------------------


class LinearTimeVarying(VectorField):
    """dx/dt = A(t) x + G w; exact (singleton) interval Jacobian."""

    def __init__(self, a, g=None, name="ltv"):
        if callable(a):
            self._a = a
            self.n_x = np.asarray(a(0.0), dtype=float).shape[0]
        else:
            mat = np.asarray(a, dtype=float)
            self._a = lambda t: mat
            self.n_x = mat.shape[0]
        self._g = None if g is None else np.asarray(g, dtype=float)
        self.n_w = 0 if self._g is None else self._g.shape[1]
        self.name = name

    def a(self, t):
        return np.asarray(self._a(t), dtype=float)

    def eval(self, t, x, w=None):
        x = np.asarray(x, dtype=float)
        out = x @ self.a(t).T
        if self._g is not None:
            out = out + np.asarray(w, dtype=float) @ self._g.T
        return out

    def jac_entries(self, t, z):
        a = self.a(t)
        if self._g is None:
            return [[a[i, j] for j in range(self.n_x)] for i in range(self.n_x)]
        return [
            [a[i, j] for j in range(self.n_x)]
            + [self._g[i, j] for j in range(self.n_w)]
            for i in range(self.n_x)
        ]


class VanDerPol(VectorField):
    """Van der Pol oscillator: dx1 = x2, dx2 = -x1 + eta (1 - x1^2) x2."""

    n_x = 2
    name = "vanderpol"

    def __init__(self, eta=1.0):
        self.eta = float(eta)

    def eval(self, t, x, w=None):
        x = np.asarray(x, dtype=float)
        x1 = x[..., 0]
        x2 = x[..., 1]
        return np.stack([x2, -x1 + self.eta * (1.0 - x1 ** 2) * x2], axis=-1)

    def jac_entries(self, t, z):
        x1, x2 = z[0], z[1]
        eta = self.eta
        return [
            [0.0, 1.0],
            [-1.0 - 2.0 * eta * x1 * x2, eta * (1.0 - x1 ** 2)],
        ]


@dataclass(frozen=True)
class RobotArmParams:
    """PD-controlled two-joint arm; m is the load mass, M the arm mass."""

    u1: float = 2.0
    u2: float = 1.0
    m: float = 1.0
    M: float = 1.0
    L: float = math.sqrt(3.0)
    kp1: float = 2.0
    kp2: float = 1.0
    kd1: float = 2.0
    kd2: float = 1.0


class RobotArm(VectorField):
    """Robot arm with state (q1, q2, z1, z2): joint angles and rates."""

    n_x = 4
    name = "robot-arm"

    def __init__(self, params: RobotArmParams | None = None):
        self.params = params or RobotArmParams()

    def eval(self, t, x, w=None):
        p = self.params
        x = np.asarray(x, dtype=float)
        q1, q2, z1, z2 = (x[..., i] for i in range(4))
        d = p.m * q2 ** 2 + p.M * p.L ** 2 / 3.0
        dz1 = (-2.0 * p.m * q2 * z1 * z2 - p.kd1 * z1
               + p.kp1 * (p.u1 - q1)) / d
        dz2 = q2 * z1 ** 2 + (-p.kd2 * z2 + p.kp2 * (p.u2 - q2)) / p.m
        return np.stack([z1, z2, dz1, dz2], axis=-1)

    def jac_entries(self, t, z):
        p = self.params
        q1, q2, z1, z2 = z[0], z[1], z[2], z[3]
        dinv = 1.0 / (p.m * q2 ** 2 + p.M * p.L ** 2 / 3.0)
        n1 = -2.0 * p.m * q2 * z1 * z2 - p.kd1 * z1 + p.kp1 * (p.u1 - q1)
        return [
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [
                -p.kp1 * dinv,
                -2.0 * p.m * z1 * z2 * dinv
                - 2.0 * p.m * q2 * n1 * dinv ** 2,
                (-2.0 * p.m * q2 * z2 - p.kd1) * dinv,
                -2.0 * p.m * q2 * z1 * dinv,
            ],
            [0.0, z1 ** 2 - p.kp2 / p.m, 2.0 * q2 * z1, -p.kd2 / p.m],
        ]


def robot_arm(params: RobotArmParams | None = None, **overrides) -> RobotArm:
    """Robot arm benchmark with PD setpoint control."""
    if params is None:
        params = RobotArmParams(**overrides)
    elif overrides:
        raise ValueError("pass either a params object or keyword overrides")
    return RobotArm(params)


def vanderpol(eta: float = 1.0) -> VanDerPol:
    """Van der Pol oscillator benchmark."""
    return VanDerPol(eta)


def ltv(a, g=None, name: str = "ltv") -> LinearTimeVarying:
    """Linear time-varying system from a matrix or a map t -> A(t);
    an optional G adds an additive disturbance channel."""
    return LinearTimeVarying(a, g=g, name=name)


def rotation_ltv() -> LinearTimeVarying:
    """Constant rotation field, the exactness benchmark."""
    return ltv(np.array([[0.0, 1.0], [-1.0, 0.0]]), name="ltv-rotation")
