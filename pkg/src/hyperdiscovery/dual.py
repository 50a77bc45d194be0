"""Vectorized forward-mode dual numbers.

A :class:`Dual` carries a primal array ``val`` of shape ``S``, a tangent
array ``grad`` of shape ``S + (n,)`` (one slot per seed direction) and,
optionally, a second-order array ``hess`` of shape ``S + (n, n)``.  With
``hess`` present the arithmetic propagates exact second derivatives, which
is what the forward solver needs for the Newton tangent.

Only the handful of operations used by the invariant/feature code are
implemented.
"""
from __future__ import annotations

import numpy as np


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


class Dual:
    __slots__ = ("val", "grad", "hess")
    __array_priority__ = 1000

    def __init__(self, val, grad, hess=None):
        self.val = np.asarray(val, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = None if hess is None else np.asarray(hess, dtype=float)

    @property
    def second_order(self):
        return self.hess is not None

    @property
    def nseed(self):
        return self.grad.shape[-1]

    @classmethod
    def variables(cls, values, second_order=False):
        """Seed each entry of the trailing axis of ``values`` as its own variable.

        ``values`` of shape ``S + (n,)`` yields ``n`` duals of shape ``S``.
        """
        values = np.asarray(values, dtype=float)
        n = values.shape[-1]
        shape = values.shape[:-1]
        out = []
        for k in range(n):
            grad = np.zeros(shape + (n,))
            grad[..., k] = 1.0
            hess = np.zeros(shape + (n, n)) if second_order else None
            out.append(cls(values[..., k], grad, hess))
        return out

    def _const(self, c):
        c = np.asarray(c, dtype=float)
        shape = np.broadcast_shapes(c.shape, self.val.shape)
        grad = np.zeros(shape + (self.nseed,))
        hess = np.zeros(shape + (self.nseed, self.nseed)) if self.second_order else None
        return Dual(np.broadcast_to(c, shape), grad, hess)

    def _coerce(self, other):
        return other if isinstance(other, Dual) else self._const(other)

    def chain(self, f0, f1, f2=None):
        """Apply a scalar function given its value and first two derivatives at ``val``."""
        grad = f1[..., None] * self.grad
        hess = None
        if self.second_order:
            hess = f1[..., None, None] * self.hess + f2[..., None, None] * _outer(self.grad, self.grad)
        return Dual(f0, grad, hess)

    def __add__(self, other):
        o = self._coerce(other)
        hess = self.hess + o.hess if self.second_order else None
        return Dual(self.val + o.val, self.grad + o.grad, hess)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.val, -self.grad, None if self.hess is None else -self.hess)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Dual):
            c = np.asarray(other, dtype=float)
            hess = c[..., None, None] * self.hess if self.second_order else None
            return Dual(c * self.val, c[..., None] * self.grad, hess)
        a, b = self, other
        grad = a.grad * b.val[..., None] + b.grad * a.val[..., None]
        hess = None
        if self.second_order:
            hess = (
                a.hess * b.val[..., None, None]
                + b.hess * a.val[..., None, None]
                + _outer(a.grad, b.grad)
                + _outer(b.grad, a.grad)
            )
        return Dual(a.val * b.val, grad, hess)

    __rmul__ = __mul__

    def reciprocal(self):
        v = self.val
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.chain(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, other):
        if not isinstance(other, Dual):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        v = self.val
        if isinstance(n, (int, np.integer)):
            n = int(n)
            if n == 0:
                return self._const(np.ones_like(v))
            if n == 1:
                return self
            # integer powers stay finite at v = 0
            f0 = v**n
            f1 = n * v ** (n - 1)
            f2 = n * (n - 1) * v ** (n - 2) if n >= 2 else np.zeros_like(v)
            return self.chain(f0, f1, f2)
        n = float(n)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.chain(v**n, n * v ** (n - 1), n * (n - 1) * v ** (n - 2))

    def log(self):
        v = self.val
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.chain(np.log(v), 1.0 / v, -1.0 / v**2)

    def exp(self):
        e = np.exp(self.val)
        return self.chain(e, e, e)

    def sqrt(self):
        return self**0.5

    def __repr__(self):
        return f"Dual(val={self.val!r}, grad={self.grad!r})"
