"""The normotope set representation.

A normotope is the sublevel set {x : ||alpha (x - center)|| <= offset} of a
norm, with an invertible square shape matrix alpha and a positive offset.
Equivalently it is the affine image {offset * alpha^{-1} z + center :
||z|| <= 1} of the unit ball, which is how sampling and plotting work.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionTooLarge,
    SingularShape,
    UnsupportedKind,
)
from .intervals import IntervalVector
from .norms import NormKind, vector_norm

__all__ = [
    "Normotope",
    "HPolytope",
    "contains",
    "interval_hull",
    "volume_cost",
    "to_hrep",
    "sample",
    "sign_matrix",
    "shape_inverse",
]

# Shape matrices with an estimated condition number above this are treated
# as singular.
COND_LIMIT = 1e12

L1_HREP_MAX_DIM = 10


def shape_inverse(alpha, cond_limit=COND_LIMIT):
    """Inverse of a shape matrix, rejecting near-singular input.

    Uses the cheap infinity-norm condition estimate ||A||_inf ||A^-1||_inf.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape == (2, 2):
        a, b = alpha[0]
        c, d = alpha[1]
        det = a * d - b * c
        if det == 0.0:
            raise SingularShape("shape matrix is singular")
        inv = np.array([[d, -b], [-c, a]]) / det
    else:
        try:
            inv = np.linalg.inv(alpha)
        except np.linalg.LinAlgError as exc:
            raise SingularShape(f"shape matrix is singular: {exc}") from exc
    if not np.all(np.isfinite(inv)):
        raise SingularShape("shape matrix inverse is not finite")
    cond = np.abs(alpha).sum(axis=1).max() * np.abs(inv).sum(axis=1).max()
    if not cond < cond_limit:
        raise SingularShape(
            f"shape matrix condition estimate {cond:.3e} above {cond_limit:.1e}")
    return inv


@dataclass(frozen=True)
class Normotope:
    """Norm-ball set with center, shape matrix, and offset."""

    kind: NormKind
    center: np.ndarray
    shape: np.ndarray
    offset: float

    def __post_init__(self):
        object.__setattr__(self, "kind", NormKind.parse(self.kind))
        center = np.asarray(self.center, dtype=float)
        shape = np.asarray(self.shape, dtype=float)
        offset = float(self.offset)
        n = center.shape[0]
        if center.ndim != 1 or shape.shape != (n, n):
            raise DimensionMismatch(
                f"center of dim {center.shape} with shape matrix {shape.shape}")
        if not (np.all(np.isfinite(center)) and np.all(np.isfinite(shape))):
            raise ValueError("normotope fields must be finite")
        if not offset > 0.0:
            raise ValueError(f"offset must be positive, got {offset}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "offset", offset)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "center": self.center.tolist(),
            "shape": self.shape.tolist(),
            "offset": self.offset,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Normotope":
        return cls(NormKind.parse(data["kind"]), np.asarray(data["center"]),
                   np.asarray(data["shape"]), float(data["offset"]))


@dataclass(frozen=True)
class HPolytope:
    """Half-space representation {x : H x <= b}."""

    H: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if H.ndim != 2 or b.shape != (H.shape[0],) or H.shape[0] < 1:
            raise DimensionMismatch(
                f"H of shape {H.shape} with b of shape {b.shape}")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "b", b)

    def contains(self, x, tol=0.0):
        return bool(np.all(self.H @ np.asarray(x, dtype=float) <= self.b + tol))


def contains(n: Normotope, x, tol: float = 0.0) -> bool:
    """Membership test ||alpha (x - center)|| <= offset + tol."""
    x = np.asarray(x, dtype=float)
    if x.shape != (n.dim,):
        raise DimensionMismatch(
            f"point of shape {x.shape} vs normotope dim {n.dim}")
    return bool(vector_norm(n.kind, n.shape @ (x - n.center)) <= n.offset + tol)


def membership_margins(n: Normotope, points) -> np.ndarray:
    """||alpha (x - center)|| - offset for a (N, n) batch; <= 0 means inside."""
    points = np.asarray(points, dtype=float)
    z = (points - n.center) @ n.shape.T
    return vector_norm(n.kind, z) - n.offset


def _hull_radii(kind: NormKind, alpha_inv: np.ndarray, offset: float) -> np.ndarray:
    # dual-norm row functionals of alpha^{-1}: the tightest axis-aligned box
    if kind is NormKind.LINF:
        r = np.abs(alpha_inv).sum(axis=1)
    elif kind is NormKind.L2:
        r = np.sqrt((alpha_inv * alpha_inv).sum(axis=1))
    else:
        r = np.abs(alpha_inv).max(axis=1)
    return offset * r


def interval_hull(n: Normotope) -> IntervalVector:
    """Smallest axis-aligned box containing the normotope."""
    inv = shape_inverse(n.shape)
    r = _hull_radii(n.kind, inv, n.offset)
    return IntervalVector(n.center - r, n.center + r)


def logdet_cost(alpha: np.ndarray, offset: float) -> float:
    """-log det(alpha^T alpha / offset^2) via a Cholesky factorization."""
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.shape[0]
    if n == 2:
        # unrolled 2x2 Cholesky of the Gram matrix
        g11 = alpha[0, 0] ** 2 + alpha[1, 0] ** 2
        g12 = alpha[0, 0] * alpha[0, 1] + alpha[1, 0] * alpha[1, 1]
        g22 = alpha[0, 1] ** 2 + alpha[1, 1] ** 2
        if not g11 > 0.0:
            raise SingularShape("shape Gram matrix is not positive definite")
        l11_sq = g11
        l22_sq = g22 - g12 * g12 / g11
        if not l22_sq > 0.0 or not math.isfinite(l22_sq):
            raise SingularShape("shape Gram matrix is not positive definite")
        return float(-(math.log(l11_sq) + math.log(l22_sq))
                     + 2.0 * n * math.log(offset))
    gram = alpha.T @ alpha
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise SingularShape(f"Cholesky of shape Gram matrix failed: {exc}") from exc
    diag = np.diag(chol)
    if not np.all(diag > 0.0) or not np.all(np.isfinite(diag)):
        raise SingularShape("shape Gram matrix is not positive definite")
    return float(-2.0 * np.log(diag).sum() + 2.0 * n * np.log(offset))


def volume_cost(n: Normotope) -> float:
    """Log-volume surrogate: smaller means a smaller set."""
    return logdet_cost(n.shape, n.offset)


def sign_matrix(n: int) -> np.ndarray:
    """All 2^n sign patterns, one per row, in lexicographic order
    starting from all +1."""
    return np.array(list(itertools.product((1.0, -1.0), repeat=n)))


def to_hrep(n: Normotope) -> HPolytope:
    """Half-space representation; exact for linf and l1 normotopes."""
    if n.kind is NormKind.L2:
        raise UnsupportedKind("an l2 normotope is an ellipsoid, not a polytope")
    if n.kind is NormKind.LINF:
        rows = n.shape
    else:
        if n.dim > L1_HREP_MAX_DIM:
            raise DimensionTooLarge(
                f"l1 H-rep has 2^n rows; n={n.dim} exceeds {L1_HREP_MAX_DIM}")
        rows = sign_matrix(n.dim) @ n.shape
    ones = np.ones(rows.shape[0])
    H = np.vstack([rows, -rows])
    b = np.concatenate([rows @ n.center + n.offset * ones,
                        -(rows @ n.center) + n.offset * ones])
    return HPolytope(H, b)


def _unit_ball_points(kind: NormKind, rng: np.random.Generator, count: int,
                      dim: int) -> np.ndarray:
    if kind is NormKind.LINF:
        return rng.uniform(-1.0, 1.0, size=(count, dim))
    if kind is NormKind.L2:
        g = rng.standard_normal((count, dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        radius = rng.random(count) ** (1.0 / dim)
        return g * radius[:, None]
    # l1: uniform over the cross-polytope via an (n+1)-exponential simplex
    # sample plus independent random signs
    e = rng.standard_exponential((count, dim + 1))
    p = e[:, :dim] / e.sum(axis=1, keepdims=True)
    signs = np.where(rng.random((count, dim)) < 0.5, -1.0, 1.0)
    return p * signs


def sample(n: Normotope, rng_seed: int, count: int) -> np.ndarray:
    """count points drawn uniformly from the normotope, deterministic in
    the seed. Every returned point passes contains() at tol 1e-9."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(rng_seed)
    z = _unit_ball_points(n.kind, rng, count, n.dim)
    inv = shape_inverse(n.shape)
    return n.offset * z @ inv.T + n.center


def boundary_points(n: Normotope, rng_seed: int, count: int) -> np.ndarray:
    """count points on the normotope boundary (norm residual exactly the
    offset, up to roundoff)."""
    rng = np.random.default_rng(rng_seed)
    g = rng.standard_normal((count, n.dim))
    g /= vector_norm(n.kind, g)[:, None]
    inv = shape_inverse(n.shape)
    return n.offset * g @ inv.T + n.center
