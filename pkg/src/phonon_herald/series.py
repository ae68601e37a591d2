"""
Truncated power series in one variable.

A :class:`Series` holds the Taylor coefficients ``c[0..order]`` of a function
of ``z`` around ``z = 0``. Coefficients beyond ``order`` are unknown, so every
arithmetic result is truncated to the smallest order of its operands. This is
all the machinery needed to read number distributions off a generating
function: ``P_n`` is the ``z**n`` coefficient.

    >>> z = Series.variable(3)
    >>> (1 / (1 - z)).coeffs
    array([1., 1., 1., 1.])
"""

from __future__ import annotations

from numbers import Number

import numpy as np

__all__ = ["Series", "compose_polynomial"]


class Series:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        self.coeffs = c

    @classmethod
    def constant(cls, value: float, order: int) -> "Series":
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c)

    @classmethod
    def variable(cls, order: int) -> "Series":
        c = np.zeros(order + 1)
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __repr__(self):
        return f"Series({self.coeffs!r})"

    def __len__(self):
        return self.coeffs.size

    def __getitem__(self, k):
        return self.coeffs[k]

    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            return other
        if isinstance(other, Number):
            return Series.constant(float(other), self.order)
        return NotImplemented

    def _pair(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return None, None
        n = min(self.order, other.order) + 1
        return self.coeffs[:n], other.coeffs[:n]

    def __add__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return Series(a + b)

    __radd__ = __add__

    def __neg__(self):
        return Series(-self.coeffs)

    def __pos__(self):
        return self

    def __sub__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return Series(a - b)

    def __rsub__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return Series(b - a)

    def __mul__(self, other):
        if isinstance(other, Number):
            return Series(self.coeffs * float(other))
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return Series(np.convolve(a, b)[: a.size])

    __rmul__ = __mul__

    def reciprocal(self) -> "Series":
        """``1/f`` by the recurrence ``r_k = -(sum_{j>=1} f_j r_{k-j}) / f_0``."""
        f = self.coeffs
        if f[0] == 0:
            raise ZeroDivisionError("series with zero constant term has no reciprocal")
        r = np.zeros_like(f)
        r[0] = 1.0 / f[0]
        for k in range(1, f.size):
            r[k] = -np.dot(f[1: k + 1], r[k - 1:: -1][:k]) / f[0]
        return Series(r)

    def __truediv__(self, other):
        if isinstance(other, Number):
            return Series(self.coeffs / float(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.reciprocal()

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Series.constant(1.0, self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out


def compose_polynomial(poly_coeffs, inner: Series) -> Series:
    """Evaluate ``sum_k poly_coeffs[k] * inner**k`` by Horner's rule."""
    poly_coeffs = np.asarray(poly_coeffs, dtype=float)
    out = Series.constant(poly_coeffs[-1], inner.order)
    for c in poly_coeffs[-2::-1]:
        out = out * inner + c
    return out
