"""Scalar dual numbers for forward-mode directional derivatives.

Used to push tangent directions through the hand-coded Jacobian entry
expressions of a vector field, which yields Hessian-vector products without
forming the full second-derivative tensor.
"""

from __future__ import annotations

import numbers

__all__ = ["Dual", "seed", "value_of", "dot_of"]


class Dual:
    """First-order dual number val + dot * eps."""

    __slots__ = ("val", "dot")

    def __init__(self, val, dot=0.0):
        self.val = float(val)
        self.dot = float(dot)

    def __repr__(self):
        return f"Dual({self.val}, {self.dot})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.dot + other.dot)
        if isinstance(other, numbers.Real):
            return Dual(self.val + other, self.dot)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.val, -self.dot)

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.dot - other.dot)
        if isinstance(other, numbers.Real):
            return Dual(self.val - other, self.dot)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, numbers.Real):
            return Dual(other - self.val, -self.dot)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val,
                        self.val * other.dot + self.dot * other.val)
        if isinstance(other, numbers.Real):
            return Dual(self.val * other, self.dot * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            return Dual(self.val * inv,
                        (self.dot - self.val * other.dot * inv) * inv)
        if isinstance(other, numbers.Real):
            return self * (1.0 / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, numbers.Real):
            inv = 1.0 / self.val
            return Dual(other * inv, -other * self.dot * inv * inv)
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, numbers.Integral) or k < 0:
            return NotImplemented
        if k == 0:
            return Dual(1.0, 0.0)
        base = self.val ** (k - 1)
        return Dual(base * self.val, k * base * self.dot)


def seed(values, direction) -> list[Dual]:
    """Dual-number vector with the given values and tangent direction."""
    return [Dual(v, d) for v, d in zip(values, direction)]


def value_of(x) -> float:
    return x.val if isinstance(x, Dual) else float(x)


def dot_of(x) -> float:
    return x.dot if isinstance(x, Dual) else 0.0
