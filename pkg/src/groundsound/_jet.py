"""Truncated Taylor arithmetic for exact time derivatives of the closed form.

A ``Jet`` holds normalized Taylor coefficients ``c_k = f^(k)(x0) / k!`` of a
function of one variable, each coefficient an ndarray. Arithmetic follows the
usual recurrences, so derivatives are exact up to rounding.
"""

from __future__ import annotations

import numpy as np


class Jet:
    __slots__ = ("c",)
    __array_ufunc__ = None

    def __init__(self, coeffs):
        self.c = list(coeffs)

    @classmethod
    def variable(cls, x0, order: int) -> "Jet":
        x0 = np.asarray(x0)
        coeffs = [x0]
        if order >= 1:
            coeffs.append(np.ones_like(x0))
        coeffs.extend(np.zeros_like(x0) for _ in range(order - 1))
        return cls(coeffs)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    def derivatives(self) -> list:
        out, fact = [], 1.0
        for k, ck in enumerate(self.c):
            if k > 1:
                fact *= k
            out.append(ck * fact)
        return out

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet([other] + [0.0] * self.order)

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet([self.c[0] + other] + self.c[1:])
        return Jet([x + y for x, y in zip(self.c, other.c)])

    __radd__ = __add__

    def __neg__(self):
        return Jet([-x for x in self.c])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet([x * other for x in self.c])
        a, b = self.c, other.c
        return Jet([sum(a[j] * b[k - j] for j in range(k + 1)) for k in range(len(a))])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet([x / other for x in self.c])
        a, b = self.c, other.c
        q = []
        for k in range(len(a)):
            acc = a[k]
            for j in range(k):
                acc = acc - q[j] * b[k - j]
            q.append(acc / b[0])
        return Jet(q)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def sqrt(self):
        x = self.c
        y = [np.sqrt(x[0])]
        for k in range(1, len(x)):
            acc = x[k]
            for j in range(1, k):
                acc = acc - y[j] * y[k - j]
            y.append(acc / (2.0 * y[0]))
        return Jet(y)

    def log(self):
        x = self.c
        y = [np.log(x[0])]
        for k in range(1, len(x)):
            acc = k * x[k]
            for j in range(1, k):
                acc = acc - j * y[j] * x[k - j]
            y.append(acc / (k * x[0]))
        return Jet(y)
