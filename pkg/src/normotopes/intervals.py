"""Interval scalars, vectors, and matrices with corner enumeration.

Plain floating-point endpoint arithmetic, no outward rounding: results are
exact up to roundoff, which is the accuracy level the Monte Carlo oracles in
this package check against.
"""

from __future__ import annotations

import numbers

import numpy as np

from .errors import CornerBudgetExceeded, DimensionMismatch

__all__ = [
    "Interval",
    "IntervalVector",
    "IntervalMatrix",
    "interval_mul",
    "interval_matvec",
    "corners",
]

# Denominators whose interval gets this close to zero are rejected.
DIV_TOL = 1e-9


class Interval:
    """Closed interval [lo, hi]; a singleton has lo == hi.

    Treated as immutable after construction. Arithmetic mixes freely with
    plain numbers, which are promoted to singletons.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        lo = float(lo)
        hi = float(hi)
        if not lo <= hi:
            raise ValueError(f"invalid interval: lo={lo} > hi={hi}")
        self.lo = lo
        self.hi = hi

    @classmethod
    def point(cls, value):
        return cls(float(value), float(value))

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    def is_singleton(self):
        return self.lo == self.hi

    def contains(self, value, tol=0.0):
        return self.lo - tol <= value <= self.hi + tol

    def __eq__(self, other):
        if isinstance(other, Interval):
            return self.lo == other.lo and self.hi == other.hi
        return NotImplemented

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return f"Interval({self.lo}, {self.hi})"

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Interval):
            return Interval(self.lo + other.lo, self.hi + other.hi)
        if isinstance(other, numbers.Real):
            return Interval(self.lo + other, self.hi + other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        if isinstance(other, Interval):
            return Interval(self.lo - other.hi, self.hi - other.lo)
        if isinstance(other, numbers.Real):
            return Interval(self.lo - other, self.hi - other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, numbers.Real):
            return Interval(other - self.hi, other - self.lo)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Interval):
            p = (self.lo * other.lo, self.lo * other.hi,
                 self.hi * other.lo, self.hi * other.hi)
            return Interval(min(p), max(p))
        if isinstance(other, numbers.Real):
            a = self.lo * other
            b = self.hi * other
            return Interval(a, b) if a <= b else Interval(b, a)
        return NotImplemented

    __rmul__ = __mul__

    def _reciprocal(self):
        if self.lo <= DIV_TOL and self.hi >= -DIV_TOL:
            raise ZeroDivisionError(
                f"interval denominator [{self.lo}, {self.hi}] spans zero "
                f"(tolerance {DIV_TOL})")
        return Interval(1.0 / self.hi, 1.0 / self.lo)

    def __truediv__(self, other):
        if isinstance(other, Interval):
            return self * other._reciprocal()
        if isinstance(other, numbers.Real):
            return self * (1.0 / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, numbers.Real):
            return self._reciprocal() * other
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, numbers.Integral) or k < 0:
            return NotImplemented
        if k == 0:
            return Interval(1.0, 1.0)
        if k % 2 == 1:
            return Interval(self.lo ** k, self.hi ** k)
        # even power: sharp around a sign change
        a = self.lo ** k
        b = self.hi ** k
        if self.lo <= 0.0 <= self.hi:
            return Interval(0.0, max(a, b))
        return Interval(min(a, b), max(a, b))


def interval_mul(a: Interval, b: Interval) -> Interval:
    """Product interval: the smallest interval containing a'·b' for all
    a' in a, b' in b."""
    return a * b


def _as_bounds(values, what):
    arr = np.asarray(values, dtype=float)
    return arr


class IntervalVector:
    """A box Z_1 x ... x Z_n stored as lower/upper bound arrays."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo = _as_bounds(lo, "lo")
        hi = _as_bounds(hi, "hi")
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionMismatch(
                f"bound shapes differ: {lo.shape} vs {hi.shape}")
        if np.any(lo > hi):
            raise ValueError("interval vector has lo > hi entries")
        self.lo = lo
        self.hi = hi

    @classmethod
    def from_intervals(cls, intervals):
        return cls([iv.lo for iv in intervals], [iv.hi for iv in intervals])

    @classmethod
    def from_point(cls, x):
        x = _as_bounds(x, "x")
        return cls(x, x.copy())

    @classmethod
    def empty(cls):
        return cls(np.zeros(0), np.zeros(0))

    def __len__(self):
        return self.lo.shape[0]

    def __getitem__(self, i) -> Interval:
        return Interval(self.lo[i], self.hi[i])

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self):
        return self.hi - self.lo

    def contains_point(self, x, tol=0.0):
        x = np.asarray(x, dtype=float)
        if x.shape != self.lo.shape:
            raise DimensionMismatch(
                f"point of dim {x.shape} vs box of dim {self.lo.shape}")
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def concat(self, other: "IntervalVector") -> "IntervalVector":
        return IntervalVector(np.concatenate([self.lo, other.lo]),
                              np.concatenate([self.hi, other.hi]))

    def __repr__(self):
        return f"IntervalVector(lo={self.lo}, hi={self.hi})"


class IntervalMatrix:
    """An m x n grid of intervals stored as lower/upper bound matrices."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo = _as_bounds(lo, "lo")
        hi = _as_bounds(hi, "hi")
        if lo.shape != hi.shape or lo.ndim != 2:
            raise DimensionMismatch(
                f"bound shapes differ: {lo.shape} vs {hi.shape}")
        if np.any(lo > hi):
            raise ValueError("interval matrix has lo > hi entries")
        self.lo = lo
        self.hi = hi

    @classmethod
    def from_point(cls, m):
        m = _as_bounds(m, "m")
        return cls(m, m.copy())

    @property
    def shape(self):
        return self.lo.shape

    @property
    def rows(self):
        return self.lo.shape[0]

    @property
    def cols(self):
        return self.lo.shape[1]

    def entry(self, i, j) -> Interval:
        return Interval(self.lo[i, j], self.hi[i, j])

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    def nonsingleton_mask(self):
        return self.lo < self.hi

    @property
    def nonsingleton_count(self):
        return int(np.count_nonzero(self.nonsingleton_mask()))

    def columns(self, sl) -> "IntervalMatrix":
        return IntervalMatrix(self.lo[:, sl], self.hi[:, sl])

    def contains_matrix(self, m, tol=0.0):
        m = np.asarray(m, dtype=float)
        return bool(np.all(m >= self.lo - tol) and np.all(m <= self.hi + tol))

    def __repr__(self):
        return f"IntervalMatrix(lo={self.lo}, hi={self.hi})"


def interval_matvec(mat: IntervalMatrix, vec: IntervalVector) -> IntervalVector:
    """Interval matrix-vector product.

    Entry i is the interval sum of the entrywise interval products, so the
    result contains M'v' for every selection M' in mat, v' in vec.
    """
    if mat.cols != len(vec):
        raise DimensionMismatch(
            f"matrix of shape {mat.shape} times vector of dim {len(vec)}")
    p1 = mat.lo * vec.lo
    p2 = mat.lo * vec.hi
    p3 = mat.hi * vec.lo
    p4 = mat.hi * vec.hi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4)).sum(axis=1)
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4)).sum(axis=1)
    return IntervalVector(lo, hi)


def _corner_bits(k: int) -> np.ndarray:
    bits = _BIT_CACHE.get(k)
    if bits is None:
        idx = np.arange(2 ** k)
        # MSB corresponds to the first nonsingleton entry
        bits = ((idx[:, None] >> np.arange(k - 1, -1, -1)[None, :]) & 1
                ).astype(float)
        _BIT_CACHE[k] = bits
    return bits


_BIT_CACHE: dict = {}


def corner_stack(mat: IntervalMatrix, cap: int = 256) -> np.ndarray:
    """All 2^k corner matrices stacked into a (2^k, m, n) array.

    Order is deterministic: nonsingleton entries are taken in row-major
    index order, the first entry varying slowest, lo before hi.
    Raises CornerBudgetExceeded when 2^k > cap.
    """
    mask = mat.nonsingleton_mask()
    rows, cols = np.nonzero(mask)  # row-major order
    k = rows.shape[0]
    if k == 0:
        return mat.lo[None, :, :].copy()
    if 2 ** k > cap:
        raise CornerBudgetExceeded(
            f"{k} nonsingleton entries give 2^{k} corners, above cap {cap}")
    out = np.broadcast_to(mat.lo, (2 ** k,) + mat.lo.shape).copy()
    lo_ns = mat.lo[rows, cols]
    hi_ns = mat.hi[rows, cols]
    bits = _corner_bits(k)
    out[:, rows, cols] = lo_ns + bits * (hi_ns - lo_ns)
    return out


def corners(mat: IntervalMatrix, cap: int = 256) -> list[np.ndarray]:
    """All 2^k corner matrices of an interval matrix with k nonsingleton
    entries, as a list; see corner_stack for the ordering contract."""
    return list(corner_stack(mat, cap))
