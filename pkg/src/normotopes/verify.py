"""Independent oracles: Monte Carlo containment, linear-case exactness,
and the optimality identity of the adjoint schedule.

The Monte Carlo integrator deliberately reuses the embedding's Euler grid
and step so containment comparisons are not confounded by integrator
mismatch.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import LinearTimeVarying, VectorField, ltv
from .embedding import (
    EmbeddingState,
    HypercontrolSchedule,
    Trajectory,
    simulate,
)
from .intervals import IntervalVector
from .norms import NormKind, vector_norm
from .sets import Normotope, boundary_points, sample, shape_inverse

__all__ = [
    "ContainmentReport",
    "mc_containment",
    "LtvExactnessReport",
    "ltv_exactness",
    "PmpReport",
    "pmp_check",
]


@dataclass
class ContainmentReport:
    """Outcome of a Monte Carlo containment sweep over a tube."""

    samples: int
    violations: int
    worst_margin: float
    per_time_violations: np.ndarray
    times: np.ndarray
    tol: float

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "per_time_violations": self.per_time_violations.tolist(),
            "tol": self.tol,
        }


def _worker_count() -> int:
    raw = os.environ.get("NORMOTOPE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _integrate_and_margin(sys: VectorField, x0_batch: np.ndarray,
                          traj: Trajectory, w_box: IntervalVector,
                          kind: NormKind, rng: np.random.Generator):
    """Euler-integrate a batch on the tube grid; margins at every time."""
    count = len(traj)
    h = float(traj.times[1] - traj.times[0]) if count > 1 else 0.0
    x = x0_batch.copy()
    margins = np.empty((count, x.shape[0]))
    centers = traj.centers
    shapes = traj.shapes
    offsets = traj.offsets
    for k in range(count):
        z = (x - centers[k]) @ shapes[k].T
        margins[k] = vector_norm(kind, z) - offsets[k]
        if k + 1 < count:
            if sys.n_w:
                w = rng.uniform(w_box.lo, w_box.hi,
                                size=(x.shape[0], sys.n_w))
                x = x + h * sys.eval(float(traj.times[k]), x, w)
            else:
                x = x + h * sys.eval(float(traj.times[k]), x)
    return margins


def mc_containment(sys: VectorField, n0: Normotope, traj: Trajectory,
                   w_box: IntervalVector | None = None,
                   n_samples: int = 1000, seed: int = 0,
                   tol: float = 1e-6) -> ContainmentReport:
    """Sample the initial set, integrate the true system on the tube's
    grid, and check membership at every grid time.

    Disturbances, when present, are drawn per step uniformly from the box
    (piecewise constant over each step).
    """
    if w_box is None:
        w_box = IntervalVector.empty()
    kind = n0.kind
    x0 = sample(n0, seed, n_samples)
    workers = _worker_count()
    if workers > 1 and n_samples >= 2 * workers:
        chunks = np.array_split(x0, workers)
        rngs = [np.random.default_rng((seed, 1 + i)) for i in range(len(chunks))]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda args: _integrate_and_margin(sys, args[0], traj, w_box,
                                                   kind, args[1]),
                zip(chunks, rngs)))
        margins = np.concatenate(parts, axis=1)
    else:
        rng = np.random.default_rng((seed, 1))
        margins = _integrate_and_margin(sys, x0, traj, w_box, kind, rng)
    bad = margins > tol
    return ContainmentReport(
        samples=n_samples,
        violations=int(bad.sum()),
        worst_margin=float(margins.max()),
        per_time_violations=bad.sum(axis=1),
        times=traj.times.copy(),
        tol=tol,
    )


@dataclass
class LtvExactnessReport:
    """Deviations of the adjoint tube from the exact linear reachable set."""

    offset_deviation: float
    max_boundary_deviation: float
    t_end: float
    trajectory: Trajectory


def ltv_exactness(a, n0: Normotope, t_f: float, h: float,
                  n_boundary: int = 100, seed: int = 0) -> LtvExactnessReport:
    """Run the adjoint embedding on dx/dt = A(t) x and measure how far the
    tube is from exact.

    For a linear system the offset should stay at its initial value to
    machine precision, and boundary points should stay on the boundary up
    to the Euler discretization error. The horizon is snapped to the
    nearest whole number of steps.
    """
    sys = a if isinstance(a, LinearTimeVarying) else ltv(a)
    steps = max(1, int(round(t_f / h)))
    tf_eff = steps * h
    sched = HypercontrolSchedule.zeros(0.0, tf_eff, h, sys.n_x)
    traj = simulate(sys, EmbeddingState.from_normotope(n0), sched, "adjoint",
                    IntervalVector.empty(), n0.kind, h, 0.0, tf_eff)
    offset_dev = abs(float(traj.offsets[-1]) - n0.offset)

    x = boundary_points(n0, seed, n_boundary)
    count = len(traj)
    for k in range(count - 1):
        x = x + h * sys.eval(float(traj.times[k]), x)
    z = (x - traj.centers[-1]) @ traj.shapes[-1].T
    boundary_dev = float(np.abs(vector_norm(n0.kind, z) - n0.offset).max())
    return LtvExactnessReport(
        offset_deviation=offset_dev,
        max_boundary_deviation=boundary_dev,
        t_end=float(traj.t_end),
        trajectory=traj,
    )


@dataclass
class PmpReport:
    """Residuals of the first-order optimality identities for the adjoint
    schedule on a linear system with the l2 norm."""

    max_costate_residual: float
    min_gap: float
    max_identity_residual: float

    def to_json(self) -> dict:
        return {
            "max_costate_residual": self.max_costate_residual,
            "min_gap": self.min_gap,
            "max_identity_residual": self.max_identity_residual,
        }


def pmp_check(a, n0: Normotope, t_f: float, h: float, n_random: int = 100,
              seed: int = 0, time_stride: int = 10) -> PmpReport:
    """Verify that the zero feed-forward schedule is a stationary point.

    Integrates the shape costate backward along the adjoint tube, pairing
    each backward step with the same Jacobian sample the forward step used
    so the product shape @ costate^T is conserved exactly. Then, for random
    perturbation matrices V, checks that the Hamiltonian gap equals
    sum_i (lambda_max - lambda_i)(V^T + V) and is nonnegative.
    """
    if n0.kind is not NormKind.L2:
        raise ValueError("the optimality identity is stated for the l2 norm")
    sys = a if isinstance(a, LinearTimeVarying) else ltv(a)
    n = sys.n_x
    steps = max(1, int(round(t_f / h)))
    tf_eff = steps * h
    sched = HypercontrolSchedule.zeros(0.0, tf_eff, h, n)
    traj = simulate(sys, EmbeddingState.from_normotope(n0), sched, "adjoint",
                    IntervalVector.empty(), n0.kind, h, 0.0, tf_eff)
    count = len(traj)

    p_alpha = -2.0 * shape_inverse(traj.shapes[-1]).T
    costates = np.empty_like(traj.shapes)
    costates[-1] = p_alpha
    for k in range(count - 2, -1, -1):
        a_k = sys.a(float(traj.times[k]))
        costates[k] = costates[k + 1] @ (np.eye(n) - h * a_k.T)

    residual = 0.0
    for k in range(count):
        residual = max(residual, float(np.abs(
            traj.shapes[k] @ costates[k].T + 2.0 * np.eye(n)).max()))

    rng = np.random.default_rng(seed)
    sample_idx = list(range(0, count, max(1, time_stride)))
    if sample_idx[-1] != count - 1:
        sample_idx.append(count - 1)
    min_gap = np.inf
    max_identity = 0.0
    y_f = float(traj.offsets[-1])
    for _ in range(n_random):
        v = rng.standard_normal((n, n))
        eigs = np.linalg.eigvalsh(v + v.T)
        lam_max = eigs[-1]
        expected = float((lam_max - eigs).sum())
        for k in sample_idx:
            # Hamiltonian difference against the zero perturbation:
            # tr(shape costate^T V) + (p_y y / 2) lambda_max(V^T + V)
            gap = float(np.sum((traj.shapes[k] @ costates[k].T) * v.T)
                        + (n / y_f) * traj.offsets[k] * lam_max)
            min_gap = min(min_gap, gap)
            max_identity = max(max_identity, abs(gap - expected))
    return PmpReport(
        max_costate_residual=residual,
        min_gap=float(min_gap),
        max_identity_residual=float(max_identity),
    )
