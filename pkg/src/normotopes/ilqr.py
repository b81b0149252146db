"""Iterative LQR over the embedding state to shrink the terminal set.

Each iteration rolls the embedding forward under the adjoint policy with a
feed-forward schedule, expands the terminal volume cost to second order,
sweeps Riccati-style value equations backward along the rollout grid, and
updates the schedule with the resulting affine correction

    u_ff <- u_ff - gamma * d(t) - K(t) (X_new(t) - X_old(t)).

Every iterate, truncated or not, is a valid overapproximating tube, so the
loop can stop at any point and return its best iterate: the one reaching
furthest in time, ties broken by the smallest terminal cost.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .duals import Dual
from .dynamics import VectorField
from .embedding import (
    EmbeddingState,
    HypercontrolSchedule,
    Trajectory,
    adjoint_policy,
    embedding_rhs_info,
    make_grid,
    packed_dim,
    rollout,
)
from .errors import BackwardPassDiverged
from .intervals import IntervalVector
from .norms import NormKind, log_norm_grad, op_norm_grad
from .sets import logdet_cost, shape_inverse

__all__ = [
    "ValueExpansion",
    "GainSchedule",
    "IlqrConfig",
    "IterateRecord",
    "IterateLog",
    "terminal_conditions",
    "linearize",
    "backward_pass",
    "forward_pass",
    "run",
]


@dataclass
class ValueExpansion:
    """Second-order expansion of the value function at one grid point."""

    sigma: float
    s: np.ndarray
    S: np.ndarray


def terminal_conditions(state: EmbeddingState) -> ValueExpansion:
    """Value expansion of the log-det volume cost at the final state.

    Closed forms: the gradient is zero in the center block, -2 a^{-T} in the
    shape block, and 2n/offset in the offset slot; the Hessian is block
    diagonal in the shape and offset blocks.
    """
    n = state.dim
    nx = packed_dim(n)
    inv = shape_inverse(state.shape)
    sigma = logdet_cost(state.shape, state.offset)

    s = np.zeros(nx)
    s[n:n + n * n] = (-2.0 * inv.T).ravel()
    s[-1] = 2.0 * n / state.offset

    S = np.zeros((nx, nx))
    inv_t = inv.T
    # d(-2 a^{-T}) = 2 a^{-T} da^T a^{-T}:
    # H[(i,j),(k,l)] = 2 inv_t[i,l] inv_t[k,j]
    h4 = 2.0 * np.einsum("il,kj->ijkl", inv_t, inv_t)
    S[n:n + n * n, n:n + n * n] = h4.reshape(n * n, n * n)
    S[-1, -1] = -2.0 * n / state.offset ** 2
    return ValueExpansion(sigma=sigma, s=s, S=S)


def linearize(sys: VectorField, t: float, state: EmbeddingState,
              u_ff: np.ndarray, kind: NormKind, w_box: IntervalVector,
              corner_cap: int = 256, ldi=None, cached_info=None):
    """Jacobians (F_X, F_U) of the embedding right-hand side with the
    adjoint policy composed in, so u_ff is the differentiation variable.

    The corner matrices are held fixed: the max over corners is
    differentiated through the argmax corner (lowest index on ties), and
    second derivatives of the dynamics enter through dual-number
    Hessian-vector products of the Jacobian entries. A cached_info record
    from a rollout at the same state/schedule skips re-evaluating the
    right-hand side.
    """
    n = state.dim
    nx = packed_dim(n)
    alpha = state.shape
    offset = state.offset
    w_mid = w_box.mid

    z0 = np.concatenate([state.center, w_mid])
    grid = np.array(sys.jac_entries(t, list(z0)), dtype=float)
    a_jac = grid[:, :n]
    u_total = -alpha @ a_jac + np.asarray(u_ff, dtype=float)

    if cached_info is None:
        _, info = embedding_rhs_info(sys, t, state, u_total, w_box, kind,
                                     corner_cap, ldi)
    else:
        info = cached_info
    alpha_inv = info.alpha_inv
    m_star = info.ldi.mx[info.i_star]
    b_star = (u_total + alpha @ m_star) @ alpha_inv
    mu_val, g_mu = log_norm_grad(kind, b_star)

    # Hessian-vector products dA_k = d(jac)/d(center_k) via dual seeding
    da = np.empty((n, n, n))
    for k in range(n):
        direction = np.zeros(n + sys.n_w)
        direction[k] = 1.0
        duals = [Dual(v, d) for v, d in zip(z0, direction)]
        da[k] = sys.jac_grid_dual(t, duals)[:, :n]

    f_x = np.zeros((nx, nx))
    f_u = np.zeros((nx, n * n))
    sa = slice(n, n + n * n)

    # center rows
    f_x[:n, :n] = a_jac

    # shape rows: d(shape)/dt = -alpha a_jac + u_ff
    for k in range(n):
        f_x[sa, k] = (-alpha @ da[k]).ravel()
    neg_a_t = -a_jac.T
    for k in range(n):
        blk = slice(n + k * n, n + (k + 1) * n)
        f_x[blk, blk] = neg_a_t
    f_u[sa, :] = np.eye(n * n)

    # offset row: d(offset)/dt = mu(B) * offset + w_term
    for k in range(n):
        f_x[-1, k] = -offset * np.sum(g_mu * (alpha @ da[k] @ alpha_inv))
    c1 = (m_star - a_jac) @ alpha_inv
    d_alpha = offset * (g_mu @ c1.T - b_star.T @ g_mu @ alpha_inv.T)
    if sys.n_w:
        mw_star = info.ldi.mw[info.j_star]
        _, g_w = op_norm_grad(kind, alpha @ mw_star)
        d_alpha = d_alpha + g_w @ mw_star.T
    f_x[-1, sa] = d_alpha.ravel()
    f_x[-1, -1] = mu_val
    f_u[-1, :] = offset * (g_mu @ alpha_inv.T).ravel()

    return f_x, f_u


@dataclass
class GainSchedule:
    """Affine correction gains and value expansion along a rollout grid."""

    times: np.ndarray
    d: np.ndarray          # (L, n^2)
    K: np.ndarray          # (L, n^2, n_X)
    sigma: np.ndarray      # (L,)
    s: np.ndarray          # (L, n_X)
    S: np.ndarray          # (L, n_X, n_X)


def backward_pass(sys: VectorField, traj: Trajectory,
                  sched: HypercontrolSchedule, r: float, kind: NormKind,
                  w_box: IntervalVector, corner_cap: int = 256,
                  linearizer=None) -> GainSchedule:
    """Backward Euler sweep of the value equations along the rollout.

    With no running cost the sweep reduces to
        -ds/dt = F_X^T s - Q_UX^T R^-1 Q_U,    Q_U = F_U^T s
        -dS/dt = Q_XX - Q_UX^T R^-1 Q_UX,      Q_UX = F_U^T S
        Q_XX = F_X^T S + S F_X
    initialized from the terminal expansion, emitting d = R^-1 Q_U and
    K = R^-1 Q_UX at every grid point.
    """
    count = len(traj)
    n = traj.n
    nx = packed_dim(n)
    h = float(traj.times[1] - traj.times[0]) if count > 1 else 0.0
    r = float(r)
    if not r > 0.0:
        raise ValueError("regularizer must be positive")
    if linearizer is None:
        cache = traj.rhs_cache or []

        def linearizer(t, state, u_ff, _cache=cache):
            k = int(round((t - traj.times[0]) / h)) if count > 1 else 0
            info = _cache[k] if k < len(_cache) else None
            return linearize(sys, t, state, u_ff, kind, w_box, corner_cap,
                             cached_info=info)

    term = terminal_conditions(traj.last_state)
    s_cur = term.s
    s_mat = term.S
    sigma = term.sigma

    d = np.zeros((count, n * n))
    gain = np.zeros((count, n * n, nx))
    sigmas = np.zeros(count)
    s_all = np.zeros((count, nx))
    s_mat_all = np.zeros((count, nx, nx))

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(count - 1, -1, -1):
            f_x, f_u = linearizer(float(traj.times[k]), traj.state(k),
                                  sched.values[k])
            q_u = f_u.T @ s_cur
            q_ux = f_u.T @ s_mat
            d[k] = q_u / r
            gain[k] = q_ux / r
            sigmas[k] = sigma
            s_all[k] = s_cur
            s_mat_all[k] = s_mat
            if not (np.all(np.isfinite(d[k])) and np.all(np.isfinite(gain[k]))):
                raise BackwardPassDiverged(
                    f"non-finite gains at grid index {k} (t={traj.times[k]})")
            if k > 0:
                q_xx = f_x.T @ s_mat + s_mat @ f_x
                s_cur = s_cur + h * (f_x.T @ s_cur - q_ux.T @ (q_u / r))
                s_mat = s_mat + h * (q_xx - q_ux.T @ q_ux / r)
                s_mat = 0.5 * (s_mat + s_mat.T)
                sigma = sigma - h * 0.5 * float(q_u @ q_u) / r
                if not np.all(np.isfinite(s_cur)) or \
                        not np.all(np.isfinite(s_mat)):
                    raise BackwardPassDiverged(
                        f"non-finite value expansion at grid index {k - 1}")

    return GainSchedule(times=traj.times.copy(), d=d, K=gain, sigma=sigmas,
                        s=s_all, S=s_mat_all)


def forward_pass(sys: VectorField, x0: EmbeddingState,
                 sched_prev: HypercontrolSchedule, traj_prev: Trajectory,
                 gains: GainSchedule, gamma: float, w_box: IntervalVector,
                 kind: NormKind, phi_max: float,
                 corner_cap: int = 256):
    """Rollout with the schedule updated on the fly from the gains.

    Past the previous iterate's end time there are no gains, so the stored
    feed-forward is applied unchanged (d = 0, K = 0 there); a single
    early-truncating iterate therefore never erases the schedule learned on
    the rest of the horizon. Returns (new schedule, new trajectory).
    """
    times = sched_prev.times
    n = x0.dim
    prev_len = len(traj_prev)
    values_new = sched_prev.values.copy()

    def control_fn(k, state):
        if k < prev_len:
            delta = state.pack() - traj_prev.states[k]
            u_ff = (sched_prev.values[k] - gamma * gains.d[k].reshape(n, n)
                    - (gains.K[k] @ delta).reshape(n, n))
            values_new[k] = u_ff
        else:
            u_ff = values_new[k]
        return adjoint_policy(sys, float(times[k]), state, u_ff,
                              w_box.mid if sys.n_w else None)

    traj_new = rollout(sys, x0, times, control_fn, w_box, kind, phi_max,
                       corner_cap)
    return HypercontrolSchedule(times.copy(), values_new), traj_new


@dataclass
class IlqrConfig:
    """Parameters of the synthesis loop.

    phases is a list of (iteration budget, regularizer) pairs; at each
    phase boundary the loop restores the best iterate so far and switches
    the regularizer. The regularizer is a scalar acting as r * identity on
    the vectorized feed-forward.
    """

    gamma: float = 1.0
    phases: list = field(default_factory=lambda: [(20, 20.0)])
    phi_max: float = np.inf
    max_iters: int | None = None
    stall_eps: float = 1e-4
    stall_window: int = 50
    corner_cap: int = 256
    snapshot_iters: tuple = ()

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError("step size gamma must be positive")
        if not self.phases:
            raise ValueError("at least one phase is required")
        for budget, r in self.phases:
            if budget < 1 or not r > 0.0:
                raise ValueError(f"bad phase ({budget}, {r})")

    @property
    def total_budget(self) -> int:
        total = sum(b for b, _ in self.phases)
        return total if self.max_iters is None else min(total, self.max_iters)


@dataclass
class IterateRecord:
    index: int
    t_end: float
    phi_end: float
    seconds: float
    truncated: bool


@dataclass
class IterateLog:
    """Per-iteration summaries plus the best iterate's full artifacts."""

    records: list
    best_index: int
    best_trajectory: Trajectory
    best_schedule: HypercontrolSchedule
    snapshots: dict

    def to_json(self) -> dict:
        return {
            "iterations": [
                {"index": rec.index, "t_end": rec.t_end,
                 "phi_end": rec.phi_end, "seconds": rec.seconds,
                 "truncated": rec.truncated}
                for rec in self.records
            ],
            "best_index": self.best_index,
            "best_trajectory": self.best_trajectory.to_json(),
        }

    def csv_rows(self):
        """(iteration, t_end, phi_terminal, cumulative_seconds) rows."""
        return [(rec.index, rec.t_end, rec.phi_end, rec.seconds)
                for rec in self.records]


def _better(t_end_a, phi_a, t_end_b, phi_b, tol):
    """True when iterate a beats iterate b."""
    if t_end_a > t_end_b + tol:
        return True
    if t_end_a < t_end_b - tol:
        return False
    return phi_a < phi_b


def _worse(t_end_a, phi_a, t_end_b, phi_b, tol):
    """True when iterate a is strictly worse than iterate b."""
    if t_end_a < t_end_b - tol:
        return True
    if t_end_a > t_end_b + tol:
        return False
    return phi_a > phi_b + 1e-12


def run(config: IlqrConfig, sys: VectorField, x0: EmbeddingState,
        kind: NormKind, t0: float, tf: float, h: float) -> IterateLog:
    """Full synthesis loop: adjoint baseline, then forward/backward sweeps
    phase by phase, tracking the best iterate throughout.

    Terminates at the iteration budget, or once the final time is reached
    and the best terminal cost improves by less than stall_eps over
    stall_window consecutive iterations. The optimizer handles undisturbed
    systems; disturbance channels stay with plain embedding rollouts.

    Step control: a candidate rollout that comes out strictly worse than
    its predecessor (shorter horizon, or same horizon with higher terminal
    cost) is retried with a halved step size, down to gamma/64, and then
    adopted regardless. Near the blow-up front of a hard instance the raw
    update map oscillates and a single overshoot can wreck the schedule
    head beyond repair, so an unguarded fixed step stalls the whole run;
    the halving keeps iterates productive while still allowing exploration
    at the floor.
    """
    if sys.n_w:
        raise ValueError("the synthesis loop expects an undisturbed system")
    kind = NormKind.parse(kind)
    w_box = IntervalVector.empty()
    grid = make_grid(t0, tf, h)
    n = x0.dim
    tie_tol = 0.5 * h
    gamma = config.gamma
    gamma_floor = gamma / 64.0
    started = time.perf_counter()

    records = []
    snapshots = {}

    def log_iterate(index, traj):
        phi_end = float(traj.phi[-1])
        records.append(IterateRecord(
            index=index, t_end=float(traj.t_end), phi_end=phi_end,
            seconds=time.perf_counter() - started,
            truncated=bool(traj.truncated)))
        if index in config.snapshot_iters or index == 1:
            snapshots[index] = traj
        return phi_end

    sched = HypercontrolSchedule.zeros(t0, tf, h, n)
    traj = rollout(
        sys, x0, grid,
        lambda k, state: adjoint_policy(sys, float(grid[k]), state,
                                        sched.values[k]),
        w_box, kind, config.phi_max, config.corner_cap)
    it = 1
    log_iterate(it, traj)
    best = {"index": 1, "sched": sched.copy(), "traj": traj,
            "t_end": traj.t_end, "phi": float(traj.phi[-1])}

    budget = config.total_budget
    stall_history = []
    stopped = False

    for phase_idx, (phase_budget, r) in enumerate(config.phases):
        if stopped or it >= budget:
            break
        if phase_idx > 0:
            sched = best["sched"].copy()
            traj = best["traj"]
        consumed = 1 if phase_idx == 0 else 0
        gains = None
        while consumed < phase_budget and it < budget and not stopped:
            if gains is None:
                try:
                    gains = backward_pass(sys, traj, sched, r, kind, w_box,
                                          config.corner_cap)
                except BackwardPassDiverged:
                    # retreat to the best iterate
                    sched = best["sched"].copy()
                    traj = best["traj"]
                    try:
                        gains = backward_pass(sys, traj, sched, r, kind,
                                              w_box, config.corner_cap)
                    except BackwardPassDiverged:
                        stopped = True
                        break
            gamma_try = gamma
            prev_t_end = traj.t_end
            prev_phi = float(traj.phi[-1])
            while True:
                cand_sched, cand_traj = forward_pass(
                    sys, x0, sched, traj, gains, gamma_try, w_box, kind,
                    config.phi_max, config.corner_cap)
                if gamma_try <= gamma_floor or not _worse(
                        cand_traj.t_end, float(cand_traj.phi[-1]),
                        prev_t_end, prev_phi, tie_tol):
                    break
                gamma_try = 0.5 * gamma_try
            sched, traj = cand_sched, cand_traj
            it += 1
            consumed += 1
            phi_end = log_iterate(it, traj)
            if _better(traj.t_end, phi_end, best["t_end"], best["phi"],
                       tie_tol):
                best = {"index": it, "sched": sched.copy(), "traj": traj,
                        "t_end": traj.t_end, "phi": phi_end}
            gains = None
            # stall detection once the horizon is reached
            if abs(best["t_end"] - grid[-1]) <= tie_tol:
                stall_history.append(best["phi"])
                if len(stall_history) > config.stall_window:
                    stall_history.pop(0)
                    if (stall_history[0] - stall_history[-1]
                            < config.stall_eps):
                        stopped = True

    snapshots[best["index"]] = best["traj"]
    snapshots[records[-1].index] = traj
    return IterateLog(records=records, best_index=best["index"],
                      best_trajectory=best["traj"],
                      best_schedule=best["sched"], snapshots=snapshots)
