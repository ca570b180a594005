"""Root-of-unity scalar kernel: q-powers, brackets, integers, factorials.

All quantities live at q = exp(i*pi/r), so q^(2r) = 1 and q^r = -1.
Arguments may be plain complex numbers or jets (see jets.Jet); every
operation is closed over both, which is how the eps -> 0 limits and
d/d-lambda derivatives used downstream stay a single code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .jets import Jet, OrderError, PoleError, jet

__all__ = [
    "QContext", "PoleError", "OrderError", "JetScalar",
    "qpow", "qbracket", "qint", "qfact", "jet_limit", "jet_derivative", "eps_jet",
]

# The jet type playing the role of a scalar extended by a truncated
# Laurent series in eps; rank-0 jets are the scalar case.
JetScalar = Jet


@dataclass(frozen=True)
class QContext:
    """Order parameter r >= 2 with q = exp(i*pi/r) and numeric tolerances."""

    r: int
    tol: float = 1e-9
    jet_order: int = 6
    q: complex = field(init=False)

    def __post_init__(self):
        if self.r < 2:
            raise ValueError(f"order parameter must be >= 2, got {self.r}")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.jet_order < 3:
            raise ValueError("jet order must be >= 3 (two L'Hopital passes plus margin)")
        object.__setattr__(self, "q", complex(np.exp(1j * np.pi / self.r)))

    def eps(self) -> Jet:
        """A fresh formal small parameter at this context's jet order."""
        return jet(self.jet_order)


def eps_jet(ctx: QContext) -> Jet:
    """The seed jet eps for this context."""
    return ctx.eps()


def qpow(ctx: QContext, x):
    """q^x = exp(i*pi*x/r) for complex or jet x."""
    if isinstance(x, Jet):
        return ((1j * np.pi / ctx.r) * x).exp()
    return complex(np.exp(1j * np.pi * complex(x) / ctx.r))


def qbracket(ctx: QContext, x):
    """{x} = q^x - q^(-x) = 2i sin(pi x / r)."""
    if isinstance(x, Jet):
        return 2j * ((np.pi / ctx.r) * x).sin()
    return complex(2j * np.sin(np.pi * complex(x) / ctx.r))


def qint(ctx: QContext, x):
    """[x] = {x}/{1} = sin(pi x / r)/sin(pi / r)."""
    if isinstance(x, Jet):
        return ((np.pi / ctx.r) * x).sin() * (1.0 / np.sin(np.pi / ctx.r))
    return complex(np.sin(np.pi * complex(x) / ctx.r) / np.sin(np.pi / ctx.r))


def qfact(ctx: QContext, n: int):
    """[n]! = [n][n-1]...[1], with [0]! = 1."""
    if n < 0:
        raise ValueError(f"q-factorial needs n >= 0, got {n}")
    out = 1.0 + 0j
    for k in range(1, n + 1):
        out *= qint(ctx, k)
    return out


def jet_limit(j, ztol: float = 1e-9, atol: float = 0.0):
    """eps -> 0 limit of a jet (or pass-through for plain numbers).

    Raises PoleError when the normalized valuation is negative, which in
    this artifact always signals a broken convention upstream: every
    deformation limit the invariants use is finite by construction.
    """
    if isinstance(j, Jet):
        return j.limit(ztol, atol)
    return complex(j)


def jet_derivative(j, n: int, ztol: float = 1e-9, atol: float = 0.0):
    """n-th derivative at eps = 0: n! times the overall eps^n coefficient."""
    if not isinstance(j, Jet):
        if n == 0:
            return complex(j)
        return 0j
    return j.derivative(n, ztol, atol)
