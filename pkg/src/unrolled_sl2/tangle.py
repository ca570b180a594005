"""Colored (1,1)-tangles: grammar, typed slices, and the evaluation engine.

A tangle is a single open strand plus elementary slices read bottom to top:
braidings, twists, cups and caps.  Parsing enforces the strand-word
discipline (labels and dual flags must compose and return to the single
open color), presets expand to frozen slice words at parse time, and the
evaluator contracts one slice gate at a time into a batched state vector,
so tensor words never materialize full composite matrices.

Frozen preset normal forms (the cap color of bare coev slices is the open
color; `insert` is the colored left coevaluation):

    hopf Z        ->  insert 2 Z; br+ 1; br+ 1; evR 2
    powerhopf n Z ->  insert 2 Z; (br(sign n) 1) x 2|n|; evR 2
    twistloop s   ->  tw(s) 1
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import prod

import numpy as np

from .jets import Jet, as_jet
from .qnum import QContext
from .rep import (
    DeformX, LinearMap, OneDim, Projective, Simple, Typical,
    WeightModule, dual, format_label, hom_space, make_module, mat_norm,
)
from .ribbon import (
    RibbonConfig, braiding_matrix, coev_left, coev_right, ev_left, ev_right,
    modified_trace, twist_matrix,
)

__all__ = [
    "TangleSyntaxError", "TypeMismatchError", "NotEndomorphismError", "BasisError",
    "Braid", "TwistSlice", "Ev", "Coev", "Insert", "TangleExpr", "EndoDecomp",
    "parse_tangle", "parse_color", "hopf_tangle", "power_hopf_tangle",
    "twist_loop_tangle", "eval_tangle", "renormalized_invariant", "decompose_endo",
    "random_braid_tangle",
]


class TangleSyntaxError(SyntaxError):
    """Malformed tangle text; carries the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class TypeMismatchError(ValueError):
    """The strand word does not compose (wrong arity, colors, or duals)."""


class NotEndomorphismError(ValueError):
    """A map expected to commute with the module action does not."""


class BasisError(ValueError):
    """The endomorphism space does not have the expected two-dimensional form."""


# ---------------------------------------------------------------------------
# slices and expressions


@dataclass(frozen=True)
class Braid:
    pos: int
    sign: int


@dataclass(frozen=True)
class TwistSlice:
    pos: int
    sign: int


@dataclass(frozen=True)
class Ev:
    pos: int
    side: str  # "L" or "R"


@dataclass(frozen=True)
class Coev:
    pos: int
    side: str


@dataclass(frozen=True)
class Insert:
    pos: int
    color: object


@dataclass(frozen=True)
class TangleExpr:
    open_color: object
    slices: tuple

    def __str__(self):
        return f"open {format_label(self.open_color)} | " + "; ".join(map(_slice_str, self.slices))


def _slice_str(s) -> str:
    if isinstance(s, Braid):
        return f"br{'+' if s.sign > 0 else '-'} {s.pos}"
    if isinstance(s, TwistSlice):
        return f"tw{'+' if s.sign > 0 else '-'} {s.pos}"
    if isinstance(s, Ev):
        return f"ev{s.side} {s.pos}"
    if isinstance(s, Coev):
        return f"coev{s.side} {s.pos}"
    if isinstance(s, Insert):
        return f"insert {s.pos} {format_label(s.color)}"
    return repr(s)


def hopf_tangle(open_color, closed_color) -> TangleExpr:
    """Open Hopf link: the closed color encircles the open strand once."""
    return TangleExpr(open_color, (Insert(2, closed_color), Braid(1, 1), Braid(1, 1),
                                   Ev(2, "R")))


def power_hopf_tangle(open_color, n: int, closed_color) -> TangleExpr:
    s = 1 if n >= 0 else -1
    slices = [Insert(2, closed_color)]
    slices += [Braid(1, s)] * (2 * abs(n))
    slices.append(Ev(2, "R"))
    return TangleExpr(open_color, tuple(slices))


def twist_loop_tangle(open_color, sign: int) -> TangleExpr:
    return TangleExpr(open_color, (TwistSlice(1, sign),))


# ---------------------------------------------------------------------------
# parsing


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<color>[VSPCX]\([^)]*\))
      | (?P<kw>open|powerhopf|hopf|twistloop|coevL|coevR|evL|evR|br\+|br-|tw\+|tw-|insert)
      | (?P<int>[+-]?\d+)
      | (?P<sign>[+-])
      | (?P<pipe>\|)
      | (?P<semi>;)
    """,
    re.VERBOSE,
)

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COLOR_RES = {
    "V": re.compile(rf"V\(\s*({_NUM})\s*\)$"),
    "S": re.compile(r"S\(\s*([+-]?\d+)\s*,\s*([+-]?\d+)\s*\)$"),
    "P": re.compile(r"P\(\s*([+-]?\d+)\s*,\s*([+-]?\d+)\s*\)$"),
    "C": re.compile(r"C\(\s*([+-]?\d+)\s*\)$"),
    "X": re.compile(rf"X\(\s*([+-]?\d+)\s*,\s*([+-]?\d+)\s*,\s*({_NUM})\s*\)$"),
}


def parse_color(text: str, offset: int = 0):
    """Parse one color token into a module label."""
    text = text.strip()
    kind = text[:1]
    rx = _COLOR_RES.get(kind)
    m = rx.match(text) if rx else None
    if m is None:
        raise TangleSyntaxError(f"bad color token {text!r}", offset)
    if kind == "V":
        return Typical(float(m.group(1)))
    if kind == "S":
        return Simple(int(m.group(1)), int(m.group(2)))
    if kind == "P":
        return Projective(int(m.group(1)), int(m.group(2)))
    if kind == "C":
        return OneDim(int(m.group(1)))
    return DeformX(int(m.group(1)), int(m.group(2)), float(m.group(3)))


def _tokenize(text: str):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise TangleSyntaxError(f"unrecognized input {text[pos:pos + 10]!r}", pos)
        if m.lastgroup != "ws":
            out.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    return out


class _Cursor:
    def __init__(self, tokens, end):
        self.toks = tokens
        self.i = 0
        self.end = end

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, "", self.end)

    def take(self, kind=None, value=None, what=""):
        tk, tv, to = self.peek()
        if tk is None or (kind and tk != kind) or (value and tv != value):
            raise TangleSyntaxError(f"expected {what or value or kind}, got {tv!r}", to)
        self.i += 1
        return tv, to

    def done(self):
        return self.i >= len(self.toks)


def parse_tangle(text: str) -> TangleExpr:
    """Parse tangle text into its preset-expanded, position-explicit normal form."""
    toks = _tokenize(text)
    cur = _Cursor(toks, len(text))
    cur.take("kw", "open")
    ctok, coff = cur.take("color", what="a color")
    open_color = parse_color(ctok, coff)
    cur.take("pipe", what="'|'")
    kind, val, off = cur.peek()
    if kind == "kw" and val in ("hopf", "powerhopf", "twistloop"):
        expr = _parse_preset(cur, open_color)
        if not cur.done():
            raise TangleSyntaxError(f"trailing input after preset: {cur.peek()[1]!r}", cur.peek()[2])
    else:
        slices = [_parse_slice(cur)]
        while not cur.done():
            cur.take("semi", what="';'")
            slices.append(_parse_slice(cur))
        expr = TangleExpr(open_color, tuple(slices))
    return _typecheck(expr)


def _parse_preset(cur: _Cursor, open_color) -> TangleExpr:
    kw, off = cur.take("kw")
    if kw == "hopf":
        ctok, coff = cur.take("color", what="a closed color")
        return hopf_tangle(open_color, parse_color(ctok, coff))
    if kw == "powerhopf":
        ntok, _ = cur.take("int", what="an integer power")
        ctok, coff = cur.take("color", what="a closed color")
        return power_hopf_tangle(open_color, int(ntok), parse_color(ctok, coff))
    stok, soff = cur.take("sign", what="a twist sign")
    return twist_loop_tangle(open_color, 1 if stok == "+" else -1)


def _parse_slice(cur: _Cursor):
    kw, off = cur.take("kw", what="a slice keyword")
    if kw in ("br+", "br-", "tw+", "tw-"):
        ntok, _ = cur.take("int", what="a strand position")
        sign = 1 if kw.endswith("+") else -1
        cls = Braid if kw.startswith("br") else TwistSlice
        return cls(int(ntok), sign)
    if kw in ("evL", "evR", "coevL", "coevR"):
        side = kw[-1]
        kind, val, _ = cur.peek()
        pos = None
        if kind == "int":
            cur.take("int")
            pos = int(val)
        cls = Ev if kw.startswith("ev") else Coev
        return cls(pos, side)
    if kw == "insert":
        ntok, _ = cur.take("int", what="a strand position")
        ctok, coff = cur.take("color", what="a color")
        return Insert(int(ntok), parse_color(ctok, coff))
    raise TangleSyntaxError(f"{kw!r} is not a slice", off)


# ---------------------------------------------------------------------------
# strand-word typing


def _typecheck(expr: TangleExpr) -> TangleExpr:
    """Simulate the strand word, filling default positions; returns the normal form."""
    word = [(expr.open_color, False)]
    out = []
    for s in expr.slices:
        if isinstance(s, (Braid, TwistSlice)):
            need = s.pos + 1 if isinstance(s, Braid) else s.pos
            if s.pos < 1 or need > len(word):
                raise TypeMismatchError(f"no strand {s.pos if need == s.pos else s.pos + 1} "
                                        f"for slice '{_slice_str(s)}' (word length {len(word)})")
            if isinstance(s, Braid):
                word[s.pos - 1], word[s.pos] = word[s.pos], word[s.pos - 1]
            out.append(s)
        elif isinstance(s, (Coev, Insert)):
            pos = s.pos if s.pos is not None else len(word) + 1
            if not 1 <= pos <= len(word) + 1:
                raise TypeMismatchError(f"cannot insert at {pos} (word length {len(word)})")
            if isinstance(s, Insert):
                pair = [(s.color, False), (s.color, True)]
                out.append(Insert(pos, s.color))
            elif s.side == "L":
                pair = [(expr.open_color, False), (expr.open_color, True)]
                out.append(Coev(pos, "L"))
            else:
                pair = [(expr.open_color, True), (expr.open_color, False)]
                out.append(Coev(pos, "R"))
            word[pos - 1:pos - 1] = pair
        elif isinstance(s, Ev):
            pos = s.pos if s.pos is not None else 1
            if not 1 <= pos <= len(word) - 1:
                raise TypeMismatchError(f"no strand pair at {pos} for '{_slice_str(s)}'")
            (la, da), (lb, db) = word[pos - 1], word[pos]
            if la != lb:
                raise TypeMismatchError(f"cap at {pos} joins different colors "
                                        f"{format_label(la)} and {format_label(lb)}")
            want = (True, False) if s.side == "L" else (False, True)
            if (da, db) != want:
                raise TypeMismatchError(f"cap ev{s.side} at {pos} needs dual pattern "
                                        f"{want}, got {(da, db)}")
            del word[pos - 1:pos + 1]
            out.append(Ev(pos, s.side))
        else:
            raise TypeMismatchError(f"unknown slice {s!r}")
    if word != [(expr.open_color, False)]:
        raise TypeMismatchError(
            "tangle does not close up to the open color; final word "
            + str([(format_label(l), d) for l, d in word]))
    return TangleExpr(expr.open_color, tuple(out))


# ---------------------------------------------------------------------------
# evaluation


_OPEN = object()  # sentinel tracking the open strand itself, not its color label


class _ModuleCache:
    def __init__(self, ctx: QContext, open_module: WeightModule):
        self.ctx = ctx
        self.store = {(_OPEN, False): open_module, (_OPEN, True): dual(open_module)}

    def get(self, key, is_dual: bool) -> WeightModule:
        k = (_key(key), is_dual)
        if k not in self.store:
            base_key = (_key(key), False)
            if base_key not in self.store:
                self.store[base_key] = make_module(self.ctx, key)
            self.store[k] = self.store[base_key] if not is_dual else dual(self.store[base_key])
        return self.store[k]


def _key(label):
    if label is _OPEN:
        return label
    return label if not isinstance(label, DeformX) or not isinstance(label.eps, Jet) \
        else (label.i, label.l, id(label.eps))


def _contract(state: Jet, dims, batch, pos, nin, gate, out_dims):
    """Contract a gate over strands [pos, pos+nin) of the batched state."""
    L = prod(dims[:pos - 1])
    din = prod(dims[pos - 1:pos - 1 + nin])
    R = prod(dims[pos - 1 + nin:])
    s4 = Jet(state.c.reshape(state.order, L, din, R, batch), state.val)
    g = gate if isinstance(gate, Jet) else as_jet(gate, state.order)
    out = g.combine(s4, lambda gc, sc: np.einsum("xy,lyrb->lxrb", gc, sc))
    new_dims = list(dims[:pos - 1]) + list(out_dims) + list(dims[pos - 1 + nin:])
    flat = Jet(out.c.reshape(out.order, -1, batch), out.val)
    return flat, new_dims


def eval_tangle(cfg: RibbonConfig, expr: TangleExpr,
                open_module: WeightModule | None = None) -> LinearMap:
    """Compose the slice maps bottom to top into an endomorphism of the open color.

    open_module overrides the module built from the open color label (used by
    the deformation pathway, which recolors the open strand).
    """
    ctx = cfg.ctx
    expr = _typecheck(expr)
    override = open_module is not None
    if open_module is None:
        open_module = make_module(ctx, expr.open_color)
    mods = _ModuleCache(ctx, open_module)
    # the open strand is tracked as a strand (sentinel), never by its color
    # label; recoloring it must not leak to closed components of equal color
    word = [(_OPEN, False)]

    jetness = open_module.is_jet or any(
        isinstance(s, Insert) and make_colored_is_jet(s.color) for s in expr.slices)
    order = ctx.jet_order if jetness else 1
    dW = open_module.dim
    state = as_jet(np.eye(dW, dtype=complex), order)  # batched over basis columns
    dims = [dW]

    for s in expr.slices:
        if isinstance(s, Braid):
            la, da = word[s.pos - 1]
            lb, db = word[s.pos]
            A = mods.get(la, da)
            B = mods.get(lb, db)
            gate = braiding_matrix(cfg, A, B, s.sign)
            state, dims = _contract(state, dims, dW, s.pos, 2, gate, (B.dim, A.dim))
            word[s.pos - 1], word[s.pos] = word[s.pos], word[s.pos - 1]
        elif isinstance(s, TwistSlice):
            la, da = word[s.pos - 1]
            A = mods.get(la, da)
            gate = twist_matrix(cfg, A, s.sign)
            state, dims = _contract(state, dims, dW, s.pos, 1, gate, (A.dim,))
        elif isinstance(s, (Coev, Insert)):
            if isinstance(s, Insert):
                A = mods.get(s.color, False)
                gate = coev_left(cfg, A)
                pair = [(s.color, False), (s.color, True)]
            elif s.side == "L":
                A = mods.get(expr.open_color, False)
                gate = coev_left(cfg, A)
                pair = [(expr.open_color, False), (expr.open_color, True)]
            else:
                A = mods.get(expr.open_color, False)
                gate = coev_right(cfg, A)
                pair = [(expr.open_color, True), (expr.open_color, False)]
            state, dims = _contract(state, dims, dW, s.pos, 0, gate, (A.dim, A.dim))
            word[s.pos - 1:s.pos - 1] = pair
        elif isinstance(s, Ev):
            (la, da), (lb, db) = word[s.pos - 1], word[s.pos]
            if _OPEN in (la, lb):
                if override:
                    raise TypeMismatchError(
                        "cannot cap the open strand while it is recolored")
                la = lb = expr.open_color
            A = mods.get(la, False)
            gate = ev_left(cfg, A) if s.side == "L" else ev_right(cfg, A)
            state, dims = _contract(state, dims, dW, s.pos, 2, gate, ())
            del word[s.pos - 1:s.pos + 1]

    mat = Jet(state.c.reshape(state.order, dW, dW), state.val)
    if not jetness:
        return LinearMap(open_module, open_module, mat.limit())
    return LinearMap(open_module, open_module, mat)


def make_colored_is_jet(label) -> bool:
    return isinstance(label, DeformX) and isinstance(label.eps, Jet)


def renormalized_invariant(cfg: RibbonConfig, expr: TangleExpr,
                           open_module: WeightModule | None = None):
    """Modified trace of the tangle endomorphism on a generic open color."""
    lm = eval_tangle(cfg, expr, open_module)
    return modified_trace(lm.source, lm)


@dataclass
class EndoDecomp:
    """Coordinates of an endomorphism against (Id, nilpotent) of a projective cover."""

    a: complex
    b: complex
    basis: tuple
    residual: float


def nilpotent_endo(p: WeightModule) -> np.ndarray:
    """The square-zero endomorphism sending the top head vector to the top socle-shift."""
    lab = p.label
    if isinstance(lab, Projective):
        i = lab.i
    elif isinstance(lab, DeformX) and not isinstance(lab.eps, Jet) and lab.eps == 0:
        i = lab.i
    else:
        raise BasisError(f"not a projective-cover module: {format_label(lab)}")
    endo = hom_space(p, p)
    if len(endo) != 2:
        raise BasisError(f"endomorphism space has dimension {len(endo)}, expected 2")
    r = p.ctx.r
    hi, si = r - 1, r + i  # indices of the top head and top socle-shift vectors
    rows = np.array([[m.matrix[hi, hi], m.matrix[si, hi]] for m in endo]).T
    coeffs = np.linalg.solve(rows, np.array([0.0, 1.0]))
    x = coeffs[0] * endo[0].matrix + coeffs[1] * endo[1].matrix
    if mat_norm(x @ x) > p.ctx.tol * max(1.0, mat_norm(x)) ** 2:
        raise BasisError("constructed endomorphism is not square-zero")
    return x


def decompose_endo(f, p: WeightModule) -> EndoDecomp:
    """Write an intertwiner of a projective cover as a Id + b x."""
    mat = f.matrix if isinstance(f, LinearMap) else f
    mat = np.asarray(mat, dtype=complex) if not isinstance(mat, Jet) else mat
    if isinstance(mat, Jet):
        raise TypeError("decompose numeric endomorphisms (take a limit first)")
    res = 0.0
    for gen in ("E", "F", "H", "K"):
        g = np.asarray(getattr(p, gen))
        r_ = np.max(np.abs(mat @ g - g @ mat)) / max(1.0, np.max(np.abs(g)) * np.max(np.abs(mat)))
        res = max(res, float(r_))
    if res > p.ctx.tol * 100:
        raise NotEndomorphismError(f"map does not commute with the action (residual {res:.2e})")
    lab = p.label
    i = lab.i if isinstance(lab, (Projective,)) else (
        lab.i if isinstance(lab, DeformX) else None)
    if i is None:
        raise BasisError(f"not a projective cover: {format_label(lab)}")
    x = nilpotent_endo(p)
    r = p.ctx.r
    hi, si = r - 1, r + i
    a = complex(mat[hi, hi])
    b = complex(mat[si, hi])
    recon = a * np.eye(p.dim) + b * x
    resid = float(np.max(np.abs(recon - mat)) / max(1.0, np.max(np.abs(mat))))
    if resid > p.ctx.tol * 100:
        raise NotEndomorphismError(f"endomorphism is outside span(Id, x) (residual {resid:.2e})")
    return EndoDecomp(a, b, (np.eye(p.dim), x), resid)


# ---------------------------------------------------------------------------
# random braid-word tangles (systematic test family)


def random_braid_tangle(rng, open_color, closed_color, max_crossings: int = 6,
                        with_twist: bool = True) -> TangleExpr:
    """A random well-typed (1,1)-tangle: one closed component braided around
    the open strand, with the underlying permutation forced back to identity."""
    n_random = int(rng.integers(0, max_crossings - 2))
    word = []
    perm = [0, 1, 2]
    for _ in range(n_random):
        p = int(rng.integers(1, 3))
        s = int(rng.choice([-1, 1]))
        word.append(Braid(p, s))
        perm[p - 1], perm[p] = perm[p], perm[p - 1]
    # undo the permutation with adjacent transpositions (bubble sort)
    fixes = []
    arr = perm[:]
    changed = True
    while changed:
        changed = False
        for p in range(2):
            if arr[p] > arr[p + 1]:
                arr[p], arr[p + 1] = arr[p + 1], arr[p]
                fixes.append(Braid(p + 1, int(rng.choice([-1, 1]))))
                changed = True
    word.extend(fixes)
    slices = [Insert(2, closed_color)]
    slices.extend(word)
    if with_twist and rng.random() < 0.5:
        slices.append(TwistSlice(1, int(rng.choice([-1, 1]))))
    slices.append(Ev(2, "R"))
    return _typecheck(TangleExpr(open_color, tuple(slices)))
