"""Truncated Laurent jets in a formal small parameter.

A jet represents  eps^val * (c[0] + c[1] eps + ... + c[n-1] eps^(n-1))
with complex coefficients that may be scalars or ndarrays of any common
shape, so the same class covers jet scalars, jet vectors and jet
matrices.  Arithmetic tracks the valuation exactly, which is what turns
the removable-singularity limits of the deformation method into plain
coefficient reads: a quotient whose valuation normalizes to >= 0 *is*
its own L'Hopital evaluation.

Precision bookkeeping: a jet of length n knows the coefficients of
eps^m for val <= m < val + n and that all lower coefficients vanish.
Binary operations keep the largest honestly-known range, so lengths may
shrink through cancellation-heavy expressions; seed with enough order
(QContext.jet_order) to absorb that.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Jet", "PoleError", "OrderError", "jet", "as_jet"]

_ZTOL = 1e-9  # relative zero threshold used in valuation normalization


class PoleError(ArithmeticError):
    """A limit was requested of a quantity that diverges as eps -> 0."""


class OrderError(ValueError):
    """A derivative order beyond the jet's truncation was requested."""


class Jet:
    """eps^val * sum_k c[k] eps^k with coefficient stack c of shape (order, *shape)."""

    __slots__ = ("val", "c")
    __array_ufunc__ = None  # keep numpy from absorbing jets into object arrays

    def __init__(self, c, val: int = 0):
        a = np.asarray(c, dtype=complex)
        if a.ndim == 0:
            a = a[None]
        self.c = a
        self.val = int(val)

    # -- introspection ---------------------------------------------------

    @property
    def order(self) -> int:
        return self.c.shape[0]

    @property
    def shape(self):
        return self.c.shape[1:]

    @property
    def valuation(self) -> int:
        return self.val

    @property
    def coeffs(self) -> np.ndarray:
        """Coefficient stack, leading coefficient first."""
        return self.c

    def __repr__(self):
        if self.shape == ():
            terms = ", ".join(f"{z:.6g}" for z in self.c[:4].tolist())
            tail = ", ..." if self.order > 4 else ""
            return f"Jet(val={self.val}, [{terms}{tail}])"
        return f"Jet(val={self.val}, shape={self.shape}, order={self.order})"

    # -- normalization ---------------------------------------------------

    def scale(self) -> float:
        return float(np.max(np.abs(self.c))) if self.c.size else 0.0

    def is_zero(self) -> bool:
        return self.scale() == 0.0

    def normalized(self, ztol: float = _ZTOL, atol: float = 0.0) -> "Jet":
        """Shift the valuation past leading coefficient slices that vanish.

        A slice counts as zero when its magnitude is below ztol times the
        largest coefficient magnitude of the whole jet, or below the
        absolute floor atol; the floor is how callers communicate the scale
        of cancelled operands, so an all-noise jet normalizes to zero
        instead of faking a pole.
        """
        s = self.scale()
        if s == 0.0 or s <= atol:
            return Jet(np.zeros((1, *self.shape)), 0)
        thresh = max(ztol * s, atol)
        flat = self.c.reshape(self.order, -1)
        k = 0
        while k < self.order and np.max(np.abs(flat[k])) <= thresh:
            k += 1
        if k == self.order:
            return Jet(np.zeros((1, *self.shape)), 0)
        if k == 0:
            return self
        return Jet(self.c[k:].copy(), self.val + k)

    # -- promotion / alignment -------------------------------------------

    def _promote(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return as_jet(other, self.order)

    @staticmethod
    def _aligned(a: "Jet", b: "Jet"):
        """Common-valuation stacks truncated to the shared precision range."""
        val = min(a.val, b.val)
        prec = min(a.val + a.order, b.val + b.order)
        n = max(prec - val, 1)
        shape = np.broadcast_shapes(a.shape, b.shape)
        ca = np.zeros((n, *shape), dtype=complex)
        cb = np.zeros((n, *shape), dtype=complex)
        ka = a.val - val
        cut = min(a.order, n - ka)
        if cut > 0:
            ca[ka:ka + cut] = a.c[:cut]
        kb = b.val - val
        cut = min(b.order, n - kb)
        if cut > 0:
            cb[kb:kb + cut] = b.c[:cut]
        return val, ca, cb

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        other = self._promote(other)
        val, ca, cb = self._aligned(self, other)
        return Jet(ca + cb, val).normalized()

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.val)

    def __sub__(self, other):
        return self + (-self._promote(other))

    def __rsub__(self, other):
        return self._promote(other) + (-self)

    def _convolve(self, other: "Jet", prod) -> "Jet":
        n = min(self.order, other.order)
        first = np.asarray(prod(self.c[0], other.c[0]), dtype=complex)
        out = np.zeros((n, *first.shape), dtype=complex)
        out[0] = first
        for k in range(1, n):
            for i in range(max(0, k - other.order + 1), min(k + 1, self.order)):
                out[k] += prod(self.c[i], other.c[k - i])
        return Jet(out, self.val + other.val)

    def __mul__(self, other):
        return self._convolve(self._promote(other), lambda x, y: x * y)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return self._convolve(self._promote(other), lambda x, y: x @ y)

    def __rmatmul__(self, other):
        return self._promote(other)._convolve(self, lambda x, y: x @ y)

    def kron(self, other) -> "Jet":
        return self._convolve(self._promote(other), np.kron)

    def combine(self, other, prod) -> "Jet":
        """Convolve coefficient stacks under an arbitrary bilinear slice product."""
        return self._convolve(self._promote(other), prod)

    def reciprocal(self) -> "Jet":
        """Multiplicative inverse of a scalar jet; PoleError on the zero jet."""
        if self.shape != ():
            raise ValueError("reciprocal() is for scalar jets; use inv() on matrices")
        j = self.normalized()
        if j.is_zero() or j.c[0] == 0:
            raise PoleError("division by a zero jet")
        n = j.order
        out = np.zeros(n, dtype=complex)
        out[0] = 1.0 / j.c[0]
        for k in range(1, n):
            out[k] = -out[0] * sum(j.c[i] * out[k - i] for i in range(1, k + 1))
        return Jet(out, -j.val)

    def __truediv__(self, other):
        return self * self._promote(other).reciprocal()

    def __rtruediv__(self, other):
        return self._promote(other) * self.reciprocal()

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("jet powers must be integers")
        if n < 0:
            return self.reciprocal() ** (-n)
        if self.shape == ():
            out = as_jet(1.0, self.order)
        else:
            out = Jet.eye(self.shape[0], self.order)
            if self.shape[0] != self.shape[-1] or len(self.shape) != 2:
                raise ValueError("matrix powers need square jet matrices")
        for _ in range(int(n)):
            out = out @ self if out.shape else out * self
        return out

    # -- analytic functions of scalar jets ---------------------------------

    def _entire(self, taylor) -> "Jet":
        """Apply an entire function via its Taylor expansion about c0.

        taylor(z0, k) must return f^(k)(z0) / k!.  Requires valuation >= 0
        after normalization (an essential singularity otherwise).
        """
        if self.shape != ():
            raise ValueError("analytic functions act on scalar jets")
        j = self if self.val >= 0 else self.normalized()
        if j.val < 0:
            raise PoleError("analytic function of a jet with a pole")
        n = j.val + j.order
        c = np.zeros(n, dtype=complex)
        c[j.val:] = j.c
        z0 = c[0]
        h = c.copy()
        h[0] = 0.0
        out = np.zeros(n, dtype=complex)
        out[0] = taylor(z0, 0)
        hk = np.zeros(n, dtype=complex)
        hk[0] = 1.0
        for k in range(1, n):
            new = np.zeros(n, dtype=complex)
            for i in range(n):
                if hk[i] != 0:
                    new[i:] += hk[i] * h[:n - i]
            hk = new
            if not np.any(hk):
                break
            out += taylor(z0, k) * hk
        return Jet(out, 0).normalized()

    def exp(self) -> "Jet":
        return self._entire(lambda z0, k: np.exp(z0) / math.factorial(k))

    def sin(self) -> "Jet":
        cyc = (np.sin, np.cos, lambda z: -np.sin(z), lambda z: -np.cos(z))
        return self._entire(lambda z0, k: cyc[k % 4](z0) / math.factorial(k))

    # -- matrix helpers ------------------------------------------------------

    @staticmethod
    def eye(n: int, order: int) -> "Jet":
        c = np.zeros((order, n, n), dtype=complex)
        c[0] = np.eye(n)
        return Jet(c, 0)

    def transpose(self) -> "Jet":
        return Jet(np.swapaxes(self.c, -1, -2), self.val)

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def trace(self) -> "Jet":
        return Jet(np.trace(self.c, axis1=-2, axis2=-1), self.val)

    def entry(self, i: int, j: int) -> "Jet":
        return Jet(self.c[:, i, j].copy(), self.val)

    def block(self, r0: int, r1: int, c0: int, c1: int) -> "Jet":
        return Jet(self.c[:, r0:r1, c0:c1].copy(), self.val)

    def diagonal(self) -> "Jet":
        return Jet(np.diagonal(self.c, axis1=-2, axis2=-1).copy(), self.val)

    def inv(self) -> "Jet":
        """Inverse of a square jet matrix with an invertible leading slice."""
        j = self.normalized()
        x0 = np.linalg.inv(j.c[0])
        out = np.zeros_like(j.c)
        out[0] = x0
        for k in range(1, j.order):
            acc = np.zeros_like(j.c[0])
            for i in range(1, k + 1):
                acc += j.c[i] @ out[k - i]
            out[k] = -x0 @ acc
        return Jet(out, -j.val)

    def norm(self) -> float:
        """Max absolute entry over all coefficient slices."""
        return self.scale()

    # -- evaluation and limits ------------------------------------------------

    def __call__(self, t: complex):
        """Numeric evaluation at eps = t, for cross-checks against plain numbers."""
        acc = np.zeros(self.shape, dtype=complex)
        for k in range(self.order - 1, -1, -1):
            acc = acc * t + self.c[k]
        acc = acc * (t ** self.val)
        return acc if self.shape else complex(acc)

    def limit(self, ztol: float = _ZTOL, atol: float = 0.0):
        """Value at eps = 0; PoleError when the normalized valuation is negative."""
        j = self.normalized(ztol, atol)
        if j.val < 0:
            raise PoleError(f"divergent jet (valuation {j.val})")
        if j.val > 0 or j.is_zero():
            return np.zeros(self.shape, dtype=complex) if self.shape else 0j
        return j.c[0].copy() if self.shape else complex(j.c[0])

    def derivative(self, n: int, ztol: float = _ZTOL, atol: float = 0.0):
        """n-th derivative at eps = 0, i.e. n! times the overall eps^n coefficient."""
        j = self.normalized(ztol, atol)
        if j.is_zero():
            return np.zeros(self.shape, dtype=complex) if self.shape else 0j
        if j.val < 0:
            raise PoleError(f"derivative of a divergent jet (valuation {j.val})")
        if n >= j.val + j.order:
            raise OrderError(f"order-{n} derivative exceeds jet precision {j.val + j.order}")
        k = n - j.val
        if k < 0:
            return np.zeros(self.shape, dtype=complex) if self.shape else 0j
        out = math.factorial(n) * j.c[k]
        return out if self.shape else complex(out)


def jet(order: int) -> Jet:
    """The seed jet eps itself, truncated at the given order."""
    c = np.zeros(order, dtype=complex)
    c[0] = 1.0
    return Jet(c, 1)


def as_jet(x, order: int) -> Jet:
    """Embed a constant scalar or array as a jet of the given order."""
    if isinstance(x, Jet):
        return x
    a = np.asarray(x, dtype=complex)
    c = np.zeros((order, *a.shape), dtype=complex)
    c[0] = a
    return Jet(c, 0)
