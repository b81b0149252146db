"""Controlled embedding of a system into center/shape/offset coordinates.

The embedding state X = (center, shape, offset) packs into a vector of
dimension n + n^2 + 1 (shape row-major). Its dynamics are

    d(center)/dt = f(t, center, w_mid)
    d(shape)/dt  = U                      (the hypercontrol)
    d(offset)/dt = max_i mu(U a^-1 + a Mx_i a^-1) * offset
                   + max_j ||a Mw_j||

where {Mx_i}, {Mw_j} are corner matrices of an interval enclosure of the
Jacobian over the current set's interval hull crossed with the disturbance
box. A single Euler rollout of this system yields a set that contains every
trajectory of the original system started inside the initial set, for any
choice of hypercontrol; the hypercontrol only affects how tight the tube is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import LdiCorners, VectorField, ldi_corners
from .errors import CornerBudgetExceeded, DimensionMismatch, SingularShape
from .intervals import IntervalVector
from .norms import NormKind, log_norm_many, op_norm_many
from .sets import Normotope, _hull_radii, logdet_cost, shape_inverse

__all__ = [
    "EmbeddingState",
    "HypercontrolSchedule",
    "Trajectory",
    "adjoint_policy",
    "embedding_rhs",
    "simulate",
]

GRID_TOL = 1e-9


@dataclass(frozen=True)
class EmbeddingState:
    """Center, shape matrix, and offset of the evolving set."""

    center: np.ndarray
    shape: np.ndarray
    offset: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        shape = np.asarray(self.shape, dtype=float)
        n = center.shape[0]
        if shape.shape != (n, n):
            raise DimensionMismatch(
                f"center dim {n} with shape matrix {shape.shape}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def pack(self) -> np.ndarray:
        return np.concatenate(
            [self.center, self.shape.ravel(), [self.offset]])

    @classmethod
    def unpack(cls, vec, n: int) -> "EmbeddingState":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (n + n * n + 1,):
            raise DimensionMismatch(
                f"packed vector of shape {vec.shape} for n={n}")
        return cls(vec[:n], vec[n:n + n * n].reshape(n, n), vec[-1])

    @classmethod
    def from_normotope(cls, n: Normotope) -> "EmbeddingState":
        return cls(n.center, n.shape, n.offset)

    def to_normotope(self, kind: NormKind) -> Normotope:
        return Normotope(kind, self.center, self.shape, self.offset)


def packed_dim(n: int) -> int:
    return n + n * n + 1


def make_grid(t0: float, tf: float, h: float) -> np.ndarray:
    """Uniform grid t0 + k h covering [t0, tf]; (tf - t0) must be an
    integer number of steps up to rounding noise."""
    if h <= 0.0:
        raise ValueError("step size must be positive")
    steps = int(round((tf - t0) / h))
    if steps < 1:
        raise ValueError(f"horizon [{t0}, {tf}] shorter than one step {h}")
    if abs(t0 + steps * h - tf) > max(1e-12, 1e-9 * abs(tf - t0)):
        raise ValueError(
            f"horizon {tf - t0} is not a whole number of steps of {h}")
    return t0 + h * np.arange(steps + 1)


@dataclass
class HypercontrolSchedule:
    """Piecewise-constant feed-forward matrices on a uniform grid.

    values[k] applies on [times[k], times[k+1]); the final entry is kept so
    the schedule and trajectory grids line up."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3 or self.values.shape[0] != self.times.shape[0]:
            raise DimensionMismatch(
                f"{self.values.shape[0]} values for {self.times.shape[0]} grid points")
        if self.times.shape[0] >= 2:
            dt = np.diff(self.times)
            if np.max(np.abs(dt - dt[0])) > GRID_TOL:
                raise ValueError("schedule grid is not uniform")

    @classmethod
    def zeros(cls, t0: float, tf: float, h: float, n: int) -> "HypercontrolSchedule":
        times = make_grid(t0, tf, h)
        return cls(times, np.zeros((times.shape[0], n, n)))

    def copy(self) -> "HypercontrolSchedule":
        return HypercontrolSchedule(self.times.copy(), self.values.copy())


@dataclass
class Trajectory:
    """Euler rollout of the embedding: grid times, packed states, applied
    hypercontrols, and the volume cost at every stored state.

    A truncated trajectory is still a valid overapproximating tube on
    [t0, t_end]; t_end equals the requested final time iff not truncated.
    rhs_cache holds the RhsInfo byproducts evaluated at states 0..L-2
    during the rollout so a following backward sweep can reuse them; it is
    never serialized.
    """

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    phi: np.ndarray
    truncated: bool
    t_end: float
    n: int
    rhs_cache: list | None = None

    def __len__(self):
        return self.times.shape[0]

    def state(self, k: int) -> EmbeddingState:
        return EmbeddingState.unpack(self.states[k], self.n)

    @property
    def last_state(self) -> EmbeddingState:
        return self.state(len(self) - 1)

    @property
    def centers(self) -> np.ndarray:
        return self.states[:, : self.n]

    @property
    def shapes(self) -> np.ndarray:
        n = self.n
        return self.states[:, n:n + n * n].reshape(-1, n, n)

    @property
    def offsets(self) -> np.ndarray:
        return self.states[:, -1]

    def to_json(self) -> dict:
        return {
            "times": self.times.tolist(),
            "centers": self.centers.tolist(),
            "shapes": self.shapes.tolist(),
            "offsets": self.offsets.tolist(),
            "phi": self.phi.tolist(),
            "truncated": bool(self.truncated),
            "t_end": float(self.t_end),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Trajectory":
        centers = np.asarray(data["centers"], dtype=float)
        shapes = np.asarray(data["shapes"], dtype=float)
        offsets = np.asarray(data["offsets"], dtype=float)
        count, n = centers.shape
        states = np.concatenate(
            [centers, shapes.reshape(count, n * n), offsets[:, None]], axis=1)
        return cls(
            times=np.asarray(data["times"], dtype=float),
            states=states,
            controls=np.zeros((max(count - 1, 0), n, n)),
            phi=np.asarray(data["phi"], dtype=float),
            truncated=bool(data["truncated"]),
            t_end=float(data["t_end"]),
            n=n,
        )


def adjoint_policy(sys: VectorField, t: float, state: EmbeddingState,
                   u_ff: np.ndarray, w_anchor=None) -> np.ndarray:
    """Hypercontrol -shape @ jac_x(center) + u_ff: cancels the first-order
    expansion of the dynamics around the center."""
    jac = sys.jac_x(t, state.center, w_anchor)
    return -state.shape @ jac + np.asarray(u_ff, dtype=float)


@dataclass
class RhsInfo:
    """Byproducts of one right-hand-side evaluation, reused by the
    linearization."""

    ldi: LdiCorners
    alpha_inv: np.ndarray
    mu_values: np.ndarray
    i_star: int
    mu_max: float
    w_values: np.ndarray
    j_star: int
    w_max: float


def _rhs_core(sys: VectorField, t: float, state: EmbeddingState,
              u: np.ndarray, w_box: IntervalVector, kind: NormKind,
              corner_cap: int, ldi: LdiCorners | None):
    alpha = state.shape
    offset = state.offset
    if not offset > 0.0:
        raise SingularShape(f"offset must stay positive, got {offset}")
    alpha_inv = shape_inverse(alpha)
    w_mid = w_box.mid
    f0 = sys.eval(t, state.center, w_mid if sys.n_w else None)

    if ldi is None:
        radii = _hull_radii(kind, alpha_inv, offset)
        x_box = IntervalVector(state.center - radii, state.center + radii)
        anchor = np.concatenate([state.center, w_mid])
        ldi = ldi_corners(sys, t, x_box, w_box, anchor, corner_cap)

    b = (u + alpha @ ldi.mx) @ alpha_inv
    mu_values = log_norm_many(kind, b)
    i_star = int(np.argmax(mu_values))
    mu_max = float(mu_values[i_star])
    if sys.n_w:
        w_values = op_norm_many(kind, alpha @ ldi.mw)
        j_star = int(np.argmax(w_values))
        w_max = float(w_values[j_star])
    else:
        w_values = np.zeros(1)
        j_star = 0
        w_max = 0.0

    deriv = np.concatenate([f0, u.ravel(), [mu_max * offset + w_max]])
    info = RhsInfo(ldi, alpha_inv, mu_values, i_star, mu_max,
                   w_values, j_star, w_max)
    return deriv, info


def embedding_rhs(sys: VectorField, t: float, state: EmbeddingState,
                  u: np.ndarray, w_box: IntervalVector, kind: NormKind,
                  corner_cap: int = 256,
                  ldi: LdiCorners | None = None) -> np.ndarray:
    """Packed derivative of the embedding state under hypercontrol u.

    Pass a precomputed corner set via ldi to evaluate the dynamics with that
    enclosure held fixed (used by the linearization and its tests)."""
    deriv, _ = _rhs_core(sys, t, state, np.asarray(u, dtype=float), w_box,
                         kind, corner_cap, ldi)
    return deriv


def embedding_rhs_info(sys, t, state, u, w_box, kind, corner_cap=256,
                       ldi=None):
    """Like embedding_rhs but also returns the corner/argmax byproducts."""
    return _rhs_core(sys, t, state, np.asarray(u, dtype=float), w_box, kind,
                     corner_cap, ldi)


_TRUNCATING = (SingularShape, CornerBudgetExceeded, ZeroDivisionError,
               FloatingPointError, OverflowError)


def rollout(sys: VectorField, x0: EmbeddingState, times: np.ndarray,
            control_fn, w_box: IntervalVector, kind: NormKind,
            phi_max: float, corner_cap: int = 256) -> Trajectory:
    """Shared Euler stepper: X_{k+1} = X_k + h F(t_k, X_k, U_k).

    control_fn(k, state) returns the applied hypercontrol for step k. The
    rollout stops early (truncated=True) the first time the volume cost
    would exceed phi_max or the step fails numerically; the prefix computed
    so far is always returned and is itself a valid tube.
    """
    n = x0.dim
    h = float(times[1] - times[0])
    steps = times.shape[0] - 1
    states = [x0.pack()]
    controls = []
    phis = [logdet_cost(x0.shape, x0.offset)]
    infos = []
    truncated = phis[0] > phi_max
    state = x0
    if not truncated:
        for k in range(steps):
            t_k = float(times[k])
            try:
                u = np.asarray(control_fn(k, state), dtype=float)
                deriv, info = _rhs_core(sys, t_k, state, u, w_box, kind,
                                        corner_cap, None)
            except _TRUNCATING:
                truncated = True
                break
            nxt = states[-1] + h * deriv
            if not np.all(np.isfinite(nxt)) or nxt[-1] <= 0.0:
                truncated = True
                break
            nxt_state = EmbeddingState.unpack(nxt, n)
            try:
                phi = logdet_cost(nxt_state.shape, nxt_state.offset)
            except SingularShape:
                truncated = True
                break
            if phi > phi_max:
                truncated = True
                break
            states.append(nxt)
            controls.append(u)
            phis.append(phi)
            infos.append(info)
            state = nxt_state
    count = len(states)
    return Trajectory(
        times=times[:count].copy(),
        states=np.array(states),
        controls=np.array(controls) if controls else np.zeros((0, n, n)),
        phi=np.array(phis),
        truncated=truncated,
        t_end=float(times[count - 1]),
        n=n,
        rhs_cache=infos,
    )


def simulate(sys: VectorField, x0: EmbeddingState,
             sched: HypercontrolSchedule, policy: str,
             w_box: IntervalVector, kind: NormKind, h: float,
             t0: float, tf: float, phi_max: float = np.inf,
             corner_cap: int = 256) -> Trajectory:
    """Euler rollout of the embedding under a feed-forward schedule.

    policy "adjoint" applies -shape @ jac_x(center) + schedule value;
    policy "raw" applies the schedule value directly.
    """
    if policy not in ("adjoint", "raw"):
        raise ValueError(f"unknown policy {policy!r}")
    times = make_grid(t0, tf, h)
    if sched.times.shape[0] != times.shape[0] or \
            np.max(np.abs(sched.times - times)) > GRID_TOL:
        raise ValueError("schedule grid does not match (t0, tf, h)")
    kind = NormKind.parse(kind)
    w_mid = w_box.mid

    if policy == "adjoint":
        def control_fn(k, state):
            return adjoint_policy(sys, float(times[k]), state,
                                  sched.values[k],
                                  w_mid if sys.n_w else None)
    else:
        def control_fn(k, state):
            return sched.values[k]

    return rollout(sys, x0, times, control_fn, w_box, kind, phi_max,
                   corner_cap)
