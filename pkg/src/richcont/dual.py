"""Forward-mode dual numbers over numpy arrays.

A :class:`Dual` carries a value and its derivative with respect to one scalar
seed. Both parts may be numpy arrays, in which case every entry is an
independent (value, derivative) pair; this is how per-cell derivatives of
the constitutive laws are obtained in one vectorized pass.
"""

from __future__ import annotations

import numpy as np


class Dual:
    __slots__ = ("val", "der")
    __array_priority__ = 100  # make ndarray <op> Dual defer to Dual

    def __init__(self, val, der=0.0):
        self.val = np.asarray(val, dtype=float) if np.ndim(val) else float(val)
        self.der = np.asarray(der, dtype=float) if np.ndim(der) else float(der)
        if np.ndim(self.der) < np.ndim(self.val):
            self.der = np.broadcast_to(self.der, np.shape(self.val)).astype(float)

    @classmethod
    def variable(cls, val):
        """Seed ``val`` as the independent variable (derivative one)."""
        return cls(val, np.ones_like(np.asarray(val, dtype=float)))

    def __repr__(self):
        return f"Dual({self.val!r}, {self.der!r})"

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.der + other.der)
        return Dual(self.val + other, self.der)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.der - other.der)
        return Dual(self.val - other, self.der)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.der)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val, self.der * other.val + self.val * other.der)
        return Dual(self.val * other, self.der * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            v = self.val / other.val
            return Dual(v, (self.der - v * other.der) / other.val)
        return Dual(self.val / other, self.der / other)

    def __rtruediv__(self, other):
        v = other / self.val
        return Dual(v, -v * self.der / self.val)

    def __pow__(self, p):
        if isinstance(p, Dual):
            return exp(p * log(self))
        v = np.power(self.val, p)
        return Dual(v, p * np.power(self.val, p - 1.0) * self.der)


def value(x):
    return x.val if isinstance(x, Dual) else x


def derivative(x):
    return x.der if isinstance(x, Dual) else np.zeros_like(np.asarray(x, dtype=float))


def _lift(fn, dfn):
    def wrapped(x):
        if isinstance(x, Dual):
            return Dual(fn(x.val), dfn(x.val) * x.der)
        return fn(x)

    return wrapped


exp = _lift(np.exp, np.exp)
log = _lift(np.log, lambda v: 1.0 / v)
log1p = _lift(np.log1p, lambda v: 1.0 / (1.0 + v))
expm1 = _lift(np.expm1, np.exp)
sqrt = _lift(np.sqrt, lambda v: 0.5 / np.sqrt(v))


def where(cond, a, b):
    """Elementwise select on values and derivatives alike."""
    if isinstance(a, Dual) or isinstance(b, Dual):
        return Dual(np.where(cond, value(a), value(b)), np.where(cond, derivative(a), derivative(b)))
    return np.where(cond, a, b)


def maximum(x, floor: float):
    """max(x, floor) with a zero derivative where the floor is active."""
    return where(value(x) < floor, floor, x)
