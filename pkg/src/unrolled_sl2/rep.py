"""Explicit matrix modules over the unrolled quantum sl2 at q = exp(i*pi/r).

Generators E, F, K, K^-1, H act by dense matrices over complex numbers or
jets.  Constructors cover: r-dimensional generic highest-weight modules,
(i+1)-dimensional simples with a character twist, one-dimensional
characters, the 2r-dimensional deformable family (whose eps = 0 member is
the projective cover), the projective covers themselves, and the
non-semisimple self-extension of a generic module.  Tensor products, duals,
direct sums, a relation verifier, an intertwiner-space solver, and the
explicit eps != 0 change of basis onto the two-summand decomposition
complete the toolbox.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .jets import Jet, as_jet
from .qnum import QContext, qint, qpow

__all__ = [
    "RangeError", "SingularError",
    "Typical", "Simple", "OneDim", "Projective", "SelfExt", "DeformX",
    "Tensor", "Sum", "Dual", "ModuleLabel",
    "WeightModule", "LinearMap", "RelationReport",
    "make_module", "make_deformable", "tensor", "dual", "direct_sum",
    "verify_relations", "hom_space", "deformable_change_of_basis",
    "intertwiner_residual", "module_dump", "format_label", "is_typical_weight",
]


class RangeError(ValueError):
    """A module-label index is outside its legal range."""


class SingularError(ArithmeticError):
    """The requested change of basis is numerically singular."""


# ---------------------------------------------------------------------------
# labels


@dataclass(frozen=True)
class Typical:
    """Generic highest-weight module of dimension r; top H-weight alpha + r - 1."""
    alpha: complex


@dataclass(frozen=True)
class Simple:
    """(i+1)-dimensional simple twisted by the weight-kr character."""
    i: int
    k: int = 0


@dataclass(frozen=True)
class OneDim:
    """One-dimensional module where H acts by kr."""
    k: int


@dataclass(frozen=True)
class Projective:
    """2r-dimensional projective cover of Simple(i, k)."""
    i: int
    k: int = 0


@dataclass(frozen=True)
class SelfExt:
    """Non-split self-extension of Typical(lam); dimension 2r, H not semisimple."""
    lam: complex


@dataclass(frozen=True)
class DeformX:
    """Deformable 2r-dimensional family; direct sum of two generics off eps = 0."""
    i: int
    l: int
    eps: object = 0.0


@dataclass(frozen=True)
class Tensor:
    left: "ModuleLabel"
    right: "ModuleLabel"


@dataclass(frozen=True)
class Sum:
    parts: tuple


@dataclass(frozen=True)
class Dual:
    inner: "ModuleLabel"


ModuleLabel = Union[Typical, Simple, OneDim, Projective, SelfExt, DeformX, Tensor, Sum, Dual]


def is_typical_weight(ctx: QContext, alpha: complex) -> bool:
    """True when alpha parameterizes a simple generic module: non-integer or in r*Z."""
    a = complex(alpha)
    n = round(a.real)
    if abs(a - n) > ctx.tol:
        return True
    return n % ctx.r == 0


def format_label(label) -> str:
    if isinstance(label, Typical):
        return f"V({_fmt_num(label.alpha)})"
    if isinstance(label, Simple):
        return f"S({label.i},{label.k})"
    if isinstance(label, OneDim):
        return f"C({label.k})"
    if isinstance(label, Projective):
        return f"P({label.i},{label.k})"
    if isinstance(label, SelfExt):
        return f"SelfExt({_fmt_num(label.lam)})"
    if isinstance(label, DeformX):
        e = label.eps
        return f"X({label.i},{label.l},{'jet' if isinstance(e, Jet) else _fmt_num(e)})"
    if isinstance(label, Tensor):
        return f"Tensor({format_label(label.left)},{format_label(label.right)})"
    if isinstance(label, Sum):
        return "Sum(" + ",".join(format_label(p) for p in label.parts) + ")"
    if isinstance(label, Dual):
        return f"Dual({format_label(label.inner)})"
    return repr(label)


def _fmt_num(z) -> str:
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:g}"
    return f"{z.real:g}{z.imag:+g}i"


# ---------------------------------------------------------------------------
# module container


@dataclass
class WeightModule:
    """Matrices for the generator action plus the (generalized) H-weights."""

    ctx: QContext
    label: object
    dim: int
    E: object
    F: object
    K: object
    Kinv: object
    H: object
    weights: list

    @property
    def is_jet(self) -> bool:
        return isinstance(self.E, Jet) or isinstance(self.K, Jet)

    def generators(self) -> dict:
        return {"E": self.E, "F": self.F, "K": self.K, "Kinv": self.Kinv, "H": self.H}

    def __repr__(self):
        return f"WeightModule({format_label(self.label)}, r={self.ctx.r}, dim={self.dim})"


@dataclass
class LinearMap:
    """Matrix with declared source and target modules (columns index the source)."""

    source: WeightModule
    target: WeightModule
    matrix: object

    def __repr__(self):
        return (f"LinearMap({format_label(self.source.label)} -> "
                f"{format_label(self.target.label)})")


# ---------------------------------------------------------------------------
# assembly helpers, polymorphic over complex / jet entries


def _assemble(dim: int, entries):
    """Dense matrix from (row, col, value) triples; jet-valued if any value is."""
    jvals = [v for _, _, v in entries if isinstance(v, Jet)]
    if not jvals:
        m = np.zeros((dim, dim), dtype=complex)
        for a, b, v in entries:
            m[a, b] += complex(v)
        return m
    val = min(0, min(j.val for j in jvals))
    prec = min(j.val + j.order for j in jvals)
    n = prec - val
    c = np.zeros((n, dim, dim), dtype=complex)
    for a, b, v in entries:
        if isinstance(v, Jet):
            k0 = v.val - val
            cut = min(v.order, n - k0)
            c[k0:k0 + cut, a, b] += v.c[:cut]
        else:
            c[-val, a, b] += complex(v)
    return Jet(c, val)


def mat_norm(m) -> float:
    if isinstance(m, Jet):
        return m.norm()
    return float(np.max(np.abs(m))) if np.asarray(m).size else 0.0


def _eye(dim: int, like) -> object:
    if isinstance(like, Jet):
        return Jet.eye(dim, like.order)
    return np.eye(dim, dtype=complex)


def _kron(a, b):
    if isinstance(a, Jet) or isinstance(b, Jet):
        if not isinstance(a, Jet):
            a = as_jet(a, b.order)
        return a.kron(b)
    return np.kron(a, b)


def _transpose(a):
    return a.T if isinstance(a, Jet) else np.asarray(a).T


def mat_limit(m):
    """Entrywise eps -> 0 limit of a (possibly jet) matrix."""
    if isinstance(m, Jet):
        return m.limit()
    return np.asarray(m, dtype=complex)


# ---------------------------------------------------------------------------
# constructors


def make_module(ctx: QContext, label) -> WeightModule:
    """Build the module named by a label, with the published generator action."""
    if isinstance(label, Typical):
        return _make_typical(ctx, label.alpha)
    if isinstance(label, Simple):
        return _make_simple(ctx, label.i, label.k)
    if isinstance(label, OneDim):
        return _make_onedim(ctx, label.k)
    if isinstance(label, Projective):
        m = make_deformable(ctx, label.i, label.k, 0.0)
        m.label = label
        return m
    if isinstance(label, SelfExt):
        return _make_selfext(ctx, label.lam)
    if isinstance(label, DeformX):
        return make_deformable(ctx, label.i, label.l, label.eps)
    if isinstance(label, Tensor):
        return tensor(make_module(ctx, label.left), make_module(ctx, label.right))
    if isinstance(label, Sum):
        return direct_sum(*[make_module(ctx, p) for p in label.parts])
    if isinstance(label, Dual):
        return dual(make_module(ctx, label.inner))
    raise TypeError(f"not a module label: {label!r}")


def _make_typical(ctx: QContext, alpha) -> WeightModule:
    r = ctx.r
    weights = [alpha + (r - 1 - 2 * k) for k in range(r)]
    e = [(k - 1, k, qint(ctx, k) * qint(ctx, -alpha + k)) for k in range(1, r)]
    f = [(k + 1, k, 1.0) for k in range(r - 1)]
    return _from_weights(ctx, Typical(alpha if isinstance(alpha, Jet) else complex(alpha)),
                         r, weights, e, f)


def _make_simple(ctx: QContext, i: int, k: int) -> WeightModule:
    r = ctx.r
    if not 0 <= i <= r - 2:
        raise RangeError(f"simple index must lie in 0..{r - 2}, got {i}")
    dim = i + 1
    weights = [i + k * r - 2 * j for j in range(dim)]
    # the (-1)^k on E is forced by [E,F] acting as [i+kr-2j] on the twisted
    # weights; it is exactly the E x K coproduct factor on the character
    e = [(j - 1, j, (-1) ** k * qint(ctx, j) * qint(ctx, i + 1 - j)) for j in range(1, dim)]
    f = [(j + 1, j, 1.0) for j in range(dim - 1)]
    return _from_weights(ctx, Simple(i, k), dim, weights, e, f)


def _make_onedim(ctx: QContext, k: int) -> WeightModule:
    return _from_weights(ctx, OneDim(k), 1, [k * ctx.r], [], [])


def _from_weights(ctx, label, dim, weights, e_entries, f_entries) -> WeightModule:
    E = _assemble(dim, e_entries)
    F = _assemble(dim, f_entries)
    H = _assemble(dim, [(t, t, w) for t, w in enumerate(weights)])
    K = _assemble(dim, [(t, t, qpow(ctx, w)) for t, w in enumerate(weights)])
    Kinv = _assemble(dim, [(t, t, qpow(ctx, -1 * w) if isinstance(w, Jet) else qpow(ctx, -w))
                           for t, w in enumerate(weights)])
    return WeightModule(ctx, label, dim, E, F, K, Kinv, H, list(weights))


def _make_selfext(ctx: QContext, lam) -> WeightModule:
    """Self-extension of Typical(lam): doubled basis with H acting by one Jordan step.

    Basis order: plain copy v0_0..v0_{r-1} then submodule copy v1_0..v1_{r-1}.
    Top generalized weight is lam + r - 1, so sub and quotient both match
    Typical(lam) in this artifact's labeling.
    """
    r = ctx.r
    lp = complex(lam) + r - 1
    ipir = 1j * np.pi / r
    dim = 2 * r
    br1 = qpow(ctx, 1) - qpow(ctx, -1)

    def beta(i):
        return ipir / br1 * sum(qpow(ctx, lp - 2 * (j - 1)) + qpow(ctx, 2 * (j - 1) - lp)
                                for j in range(1, i + 1))

    h, k, kinv, e, f = [], [], [], [], []
    for i in range(r):
        w = lp - 2 * i
        qw = qpow(ctx, w)
        for blk in (0, r):
            h.append((blk + i, blk + i, w))
            k.append((blk + i, blk + i, qw))
            kinv.append((blk + i, blk + i, 1 / qw))
        h.append((r + i, i, 1.0))            # Jordan step on the plain copy
        k.append((r + i, i, ipir * qw))      # q^H = q^D (1 + (i pi / r) N)
        kinv.append((r + i, i, -ipir / qw))
        if i >= 1:
            c = qint(ctx, i) * qint(ctx, lp + 1 - i)
            e.append((i - 1, i, c))
            e.append((r + i - 1, r + i, c))
            e.append((r + i - 1, i, beta(i)))
        if i <= r - 2:
            f.append((i + 1, i, 1.0))
            f.append((r + i + 1, r + i, 1.0))
    return WeightModule(ctx, SelfExt(complex(lam)), dim,
                        _assemble(dim, e), _assemble(dim, f),
                        _assemble(dim, k), _assemble(dim, kinv),
                        _assemble(dim, h),
                        [lp - 2 * (i % r) for i in range(2 * r)])


def deform_block_sizes(ctx: QContext, i: int):
    """(left, head, socle-shift, right) basis-block sizes of the deformable module."""
    r = ctx.r
    return (r - i - 1, i + 1, i + 1, r - i - 1)


def make_deformable(ctx: QContext, i: int, l: int, eps) -> WeightModule:
    """The 2r-dimensional one-parameter family through the projective cover.

    Basis blocks in order: w^L (indices i+2-2r..-i-2 step 2), w^H (-i..i),
    w^S (-i..i), w^R (i+2..2r-2-i).  eps may be a number in (-1/2, 1/2) or a
    jet centered at 0; at eps = 0 the action is the projective cover twisted
    by the weight-lr character.  Sign conventions follow the change-of-basis
    construction (the one the relation suite accepts).
    """
    r = ctx.r
    if not 0 <= i <= r - 2:
        raise RangeError(f"deformable index must lie in 0..{r - 2}, got {i}")
    if not isinstance(eps, Jet):
        eps = complex(eps)
        if abs(eps.imag) > 1e-12 or not -0.5 < eps.real < 0.5:
            raise RangeError(f"numeric deformation parameter must lie in (-1/2, 1/2), got {eps}")
    sgn = (-1) ** l
    nL = r - i - 1
    Lidx = lambda k: (k - (i + 2 - 2 * r)) // 2
    Hidx = lambda k: nL + (k + i) // 2
    Sidx = lambda k: nL + (i + 1) + (k + i) // 2
    Ridx = lambda k: nL + 2 * (i + 1) + (k - (i + 2)) // 2
    dim = 2 * r

    b = qint(ctx, 1 + i) * qint(ctx, eps)

    idx_weight = []
    for k in range(i + 2 - 2 * r, -i - 1, 2):
        idx_weight.append((Lidx(k), k))
    for k in range(-i, i + 1, 2):
        idx_weight.append((Hidx(k), k))
        idx_weight.append((Sidx(k), k))
    for k in range(i + 2, 2 * r - 1 - i, 2):
        idx_weight.append((Ridx(k), k))
    idx_weight.sort()
    weights = [k + l * r + eps for _, k in idx_weight]

    h = [(t, t, w) for t, w in enumerate(weights)]
    kk = [(t, t, sgn * qpow(ctx, kv + eps)) for (t, kv) in idx_weight]
    kinv = [(t, t, sgn * (qpow(ctx, -1 * (kv + eps)) if isinstance(eps, Jet)
                          else qpow(ctx, -(kv + eps)))) for (t, kv) in idx_weight]

    f = []
    for k in range(-i + 2, i + 1, 2):
        f.append((Hidx(k - 2), Hidx(k), 1.0))
        f.append((Sidx(k - 2), Sidx(k), 1.0))
    f.append((Lidx(-i - 2), Hidx(-i), 1.0))
    f.append((Lidx(-i - 2), Sidx(-i), -1 * b))
    for k in range(i + 4 - 2 * r, -i - 1, 2):
        f.append((Lidx(k - 2), Lidx(k), 1.0))
    f.append((Sidx(i), Ridx(i + 2), 1.0))
    f.append((Hidx(i), Ridx(i + 2), b))
    for t in range(1, nL):
        f.append((Ridx(i + 2 * t), Ridx(i + 2 + 2 * t),
                  -1 * qint(ctx, 1 + i + t) * qint(ctx, t + eps)))

    e = []
    for t in range(nL - 1):
        e.append((Ridx(i + 4 + 2 * t), Ridx(i + 2 + 2 * t), sgn))
    e.append((Ridx(i + 2), Hidx(i), sgn))
    e.append((Ridx(i + 2), Sidx(i), -2 * sgn * b))
    for t in range(1, i + 1):
        k = i - 2 * t
        cH = (2 * qint(ctx, t) * qint(ctx, 1 + i - t + eps)
              - qint(ctx, 1 + i - t) * qint(ctx, t - eps))
        e.append((Hidx(k + 2), Hidx(k), sgn * cH))
        e.append((Sidx(k + 2), Hidx(k), sgn))
        cS = (2 * qint(ctx, 1 + i - t) * qint(ctx, t - eps)
              - qint(ctx, 1 + i - t + eps) * qint(ctx, t))
        e.append((Sidx(k + 2), Sidx(k), sgn * cS))
        e.append((Hidx(k + 2), Sidx(k), -2 * sgn * (b * b)))
    e.append((Hidx(-i), Lidx(-i - 2), 2 * sgn * b))
    e.append((Sidx(-i), Lidx(-i - 2), sgn))
    for t in range(1, nL):
        e.append((Lidx(-i - 2 * t), Lidx(-i - 2 - 2 * t),
                  -sgn * qint(ctx, 1 + i + t) * qint(ctx, t - eps)))

    return WeightModule(ctx, DeformX(i, l, eps), dim,
                        _assemble(dim, e), _assemble(dim, f),
                        _assemble(dim, kk), _assemble(dim, kinv),
                        _assemble(dim, h), weights)


# ---------------------------------------------------------------------------
# tensor / dual / sums


def tensor(m: WeightModule, n: WeightModule, variant: str = "EK") -> WeightModule:
    """Tensor product module under the coproduct.

    variant "EK": E -> 1 x E + E x K, F -> K^-1 x F + F x 1 (the calibrated
    convention); variant "KE": the opposite one, kept as the documented
    fallback.
    """
    if m.ctx.r != n.ctx.r:
        raise ValueError("tensor factors must share a context")
    dim = m.dim * n.dim
    Im = np.eye(m.dim, dtype=complex)  # _kron promotes against jet factors
    In = np.eye(n.dim, dtype=complex)
    if variant == "EK":
        E = _kron(Im, n.E) + _kron(m.E, n.K)
        F = _kron(m.Kinv, n.F) + _kron(m.F, In)
    elif variant == "KE":
        E = _kron(m.E, In) + _kron(m.K, n.E)
        F = _kron(Im, n.F) + _kron(m.F, n.Kinv)
    else:
        raise ValueError(f"unknown coproduct variant {variant!r}")
    K = _kron(m.K, n.K)
    Kinv = _kron(m.Kinv, n.Kinv)
    H = _kron(m.H, In) + _kron(Im, n.H)
    weights = [wm + wn for wm in m.weights for wn in n.weights]
    return WeightModule(m.ctx, Tensor(m.label, n.label), dim, E, F, K, Kinv, H, weights)


def dual(m: WeightModule) -> WeightModule:
    """Dual module via the antipode: generator u acts by S(u) transposed."""
    E = -1 * _transpose(m.E @ m.Kinv)
    F = -1 * _transpose(m.K @ m.F)
    K = _transpose(m.Kinv)
    Kinv = _transpose(m.K)
    H = -1 * _transpose(m.H)
    weights = [-1 * w if isinstance(w, Jet) else -w for w in m.weights]
    return WeightModule(m.ctx, Dual(m.label), m.dim, E, F, K, Kinv, H, weights)


def direct_sum(*mods: WeightModule) -> WeightModule:
    if not mods:
        raise ValueError("empty direct sum")
    ctx = mods[0].ctx
    dim = sum(m.dim for m in mods)
    out = {}
    for gen in ("E", "F", "K", "Kinv", "H"):
        entries = []
        off = 0
        for m in mods:
            g = getattr(m, gen)
            if isinstance(g, Jet):
                for a in range(m.dim):
                    for bcol in range(m.dim):
                        entries.append((off + a, off + bcol, g.entry(a, bcol)))
            else:
                ga = np.asarray(g)
                for a, bcol in zip(*np.nonzero(ga)):
                    entries.append((off + int(a), off + int(bcol), ga[a, bcol]))
            off += m.dim
        out[gen] = _assemble(dim, entries)
    weights = [w for m in mods for w in m.weights]
    return WeightModule(ctx, Sum(tuple(m.label for m in mods)), dim,
                        out["E"], out["F"], out["K"], out["Kinv"], out["H"], weights)


# ---------------------------------------------------------------------------
# relation verification


@dataclass
class RelationReport:
    max_residual: float
    failed: list
    residuals: dict = field(default_factory=dict)

    def ok(self, tol: float) -> bool:
        return self.max_residual < tol


def _rel_residual(lhs_terms) -> float:
    """Norm of the sum of terms, relative to the largest term magnitude."""
    acc = lhs_terms[0]
    for t in lhs_terms[1:]:
        acc = acc + t
    scale = max([1.0] + [mat_norm(t) for t in lhs_terms])
    return mat_norm(acc) / scale


def verify_relations(m: WeightModule) -> RelationReport:
    """Check every defining relation; reports residuals, never raises."""
    ctx = m.ctx
    q2 = qpow(ctx, 2)
    E, F, K, Ki, H = m.E, m.F, m.K, m.Kinv, m.H
    I = _eye(m.dim, E)
    res = {}
    res["KE=q2EK"] = _rel_residual([K @ E, -q2 * (E @ K)])
    res["KF=q-2FK"] = _rel_residual([K @ F, -(1 / q2) * (F @ K)])
    res["HK=KH"] = _rel_residual([H @ K, -1 * (K @ H)])
    res["[H,E]=2E"] = _rel_residual([H @ E, -1 * (E @ H), -2 * E])
    res["[H,F]=-2F"] = _rel_residual([H @ F, -1 * (F @ H), 2 * F])
    comm_rhs = (1.0 / (ctx.q - 1 / ctx.q)) * (K - Ki)
    res["[E,F]=(K-K^-1)/(q-q^-1)"] = _rel_residual([E @ F, -1 * (F @ E), -1 * comm_rhs])
    Ep = _matpow(E, ctx.r)
    Fp = _matpow(F, ctx.r)
    scaleE = max(1.0, mat_norm(E)) ** ctx.r
    scaleF = max(1.0, mat_norm(F)) ** ctx.r
    res["E^r=0"] = mat_norm(Ep) / scaleE
    res["F^r=0"] = mat_norm(Fp) / scaleF
    res["K Kinv=1"] = _rel_residual([K @ Ki, -1 * I])
    res["q^H=K"] = _qh_equals_k_residual(m)
    failed = [name for name, v in res.items() if v > ctx.tol]
    return RelationReport(max(res.values()), failed, res)


def _matpow(a, n: int):
    out = a
    for _ in range(n - 1):
        out = out @ a
    return out


def _qh_equals_k_residual(m: WeightModule) -> float:
    ctx = m.ctx
    if m.is_jet:
        # jet modules in this artifact always have diagonal H
        qh = _assemble(m.dim, [(t, t, qpow(ctx, w) if isinstance(w, Jet) else qpow(ctx, w))
                               for t, w in enumerate(m.weights)])
        return _rel_residual([qh, -1 * m.K])
    H = np.asarray(m.H)
    if np.max(np.abs(H - np.diag(np.diag(H)))) < 1e-14:
        qh = np.diag(np.exp(1j * np.pi / ctx.r * np.diag(H)))
    else:
        from scipy.linalg import expm
        qh = expm(1j * np.pi / ctx.r * H)
    return _rel_residual([qh, -1 * np.asarray(m.K)])


# ---------------------------------------------------------------------------
# intertwiner spaces


def hom_space(m: WeightModule, n: WeightModule, wtol: float = 1e-8):
    """Basis of maps A with A rho_M(g) = rho_N(g) A for g in {E, F, H, K}.

    Entries between distinct generalized H-weights vanish, so the linear
    system is restricted to weight-matched entries before the SVD nullspace.
    The returned orthonormal basis is deterministic: pivots are chosen
    greedily along a weight-sorted entry order.
    """
    if m.is_jet or n.is_jet:
        raise TypeError("hom_space expects numeric modules")
    if m.ctx.r != n.ctx.r:
        raise ValueError("modules from different contexts")
    wm = np.asarray([complex(w) for w in m.weights])
    wn = np.asarray([complex(w) for w in n.weights])
    cand = [(a, b) for a in range(n.dim) for b in range(m.dim)
            if abs(wn[a] - wm[b]) < wtol]
    if not cand:
        return []
    ncand = len(cand)
    gens = [(np.asarray(n.E), np.asarray(m.E)), (np.asarray(n.F), np.asarray(m.F)),
            (np.asarray(n.H), np.asarray(m.H)), (np.asarray(n.K), np.asarray(m.K))]
    rows = []
    for gn, gm in gens:
        block = np.zeros((n.dim * m.dim, ncand), dtype=complex)
        for c, (a, b) in enumerate(cand):
            # A -> gn A - A gm, entry (p, q)
            block[a * m.dim: a * m.dim + m.dim, c] -= gm[b, :]
            block[np.arange(n.dim) * m.dim + b, c] += gn[:, a]
        rows.append(block)
    S = np.vstack(rows)
    u, sv, vh = np.linalg.svd(S, full_matrices=True)
    smax = sv[0] if len(sv) else 0.0
    cut = m.ctx.tol * max(smax, 1.0)
    rank = int(np.sum(sv > cut))
    null = vh[rank:].conj().T  # (ncand, dnull)
    dnull = null.shape[1]
    if dnull == 0:
        return []
    proj = null @ null.conj().T
    order = sorted(range(ncand),
                   key=lambda c: (round(wn[cand[c][0]].real, 6),
                                  round(wn[cand[c][0]].imag, 6), cand[c]))
    basis = []
    for c in order:
        v = proj[:, c].copy()
        for u_ in basis:
            v -= (u_.conj() @ v) * u_
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            # fix the phase: make the pivot entry real positive
            v = v / nv
            v = v * np.exp(-1j * np.angle(v[c]))
            basis.append(v)
        if len(basis) == dnull:
            break
    maps = []
    for v in basis:
        A = np.zeros((n.dim, m.dim), dtype=complex)
        for c, (a, b) in enumerate(cand):
            A[a, b] = v[c]
        maps.append(LinearMap(m, n, A))
    return maps


def intertwiner_residual(lm: LinearMap) -> float:
    """Largest relative residual of A g_source - g_target A over the generators."""
    worst = 0.0
    A = lm.matrix
    for gen in ("E", "F", "H", "K"):
        gs = getattr(lm.source, gen)
        gt = getattr(lm.target, gen)
        worst = max(worst, _rel_residual([A @ gs, -1 * (gt @ A)]))
    return worst


# ---------------------------------------------------------------------------
# explicit decomposition of the deformable family at eps != 0


def deformable_change_of_basis(ctx: QContext, i: int, l: int, eps) -> LinearMap:
    """Invertible intertwiner from the two-summand module onto the family.

    Source is Typical(1+i-r+lr+eps) (+) Typical(-1-i+r+lr+eps) with its
    standard bases x_0..x_{r-1}, y_0..y_{r-1}; target is the deformable
    module.  Raises SingularError when [1+i][eps] is below sqrt(tol), where
    the basis change degenerates.
    """
    if isinstance(eps, Jet):
        raise TypeError("change of basis is defined for numeric eps != 0")
    eps = complex(eps)
    r = ctx.r
    if not 0 <= i <= r - 2:
        raise RangeError(f"index must lie in 0..{r - 2}, got {i}")
    b = qint(ctx, 1 + i) * qint(ctx, eps)
    if abs(b) < np.sqrt(ctx.tol):
        raise SingularError(f"[1+i][eps] = {b:.3e} is numerically singular")
    nL = r - i - 1
    Ho = nL
    So = nL + (i + 1)
    Ro = nL + 2 * (i + 1)
    B = np.zeros((2 * r, 2 * r), dtype=complex)  # columns: w-basis in (x, y) coords
    for t in range(i + 1):
        # w^H_{i-2t} and w^S_{i-2t} mix x_t with y_{r-1-i+t}
        colH = Ho + (i - 2 * t + i) // 2
        colS = So + (i - 2 * t + i) // 2
        B[t, colH] = 2.0
        B[r + (r - 1 - i + t), colH] = -1.0 / (2 * b)
        B[t, colS] = -2.0 * b
        B[r + (r - 1 - i + t), colS] = 1.0
    for t in range(nL):
        colL = Lcol = (-(i + 2) - 2 * t - (i + 2 - 2 * r)) // 2
        B[1 + i + t, colL] = 2.0
        prod = 1.0 + 0j
        for s in range(t + 1):
            prod *= qint(ctx, 1 + i + s) * qint(ctx, -s - eps)
        colR = Ro + t
        B[r + (r - 2 - i - t), colR] = -prod / (2 * b)
    lm = 1 + i - r + l * r + eps
    lp = -1 - i + r + l * r + eps
    source = direct_sum(make_module(ctx, Typical(lm)), make_module(ctx, Typical(lp)))
    target = make_deformable(ctx, i, l, eps)
    A = np.linalg.inv(B)
    return LinearMap(source, target, A)


# ---------------------------------------------------------------------------
# dumps


def module_dump(m: WeightModule) -> dict:
    """JSON-ready dump: label, r, dim, weights and generator matrices."""
    if m.is_jet:
        raise TypeError("dump numeric modules (take a limit first)")

    def cmat(a):
        a = np.asarray(a, dtype=complex)
        return [[[float(z.real), float(z.imag)] for z in row] for row in a]

    return {
        "label": format_label(m.label),
        "r": m.ctx.r,
        "dim": m.dim,
        "weights": [[float(complex(w).real), float(complex(w).imag)] for w in m.weights],
        "E": cmat(m.E), "F": cmat(m.F), "K": cmat(m.K), "H": cmat(m.H),
    }
