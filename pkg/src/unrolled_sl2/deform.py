"""Logarithmic tangle invariants on projective colors via deformation limits.

A projective cover sits at the degenerate point of a one-parameter family
whose generic member splits into two generic-weight summands.  Every
invariant of a tangle colored by the cover is therefore computed by
recoloring the open strand with the two generic summands at a jet-valued
parameter, evaluating the ordinary renormalized invariants there, and
reading the limit off the jets: the trace is the limit of the sum, the
identity coefficient the common limit of the two normalized scalars, and
the nilpotent coefficient both a quotient limit and (cross-check) a
derivative combination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jets import Jet
from .qnum import QContext, jet_derivative, jet_limit, qbracket, qint, qpow
from .rep import (
    DeformX, OneDim, Projective, Simple, Typical, make_deformable, make_module,
    mat_limit,
)
from .ribbon import RibbonConfig, modified_dim, scalar_of
from .tangle import EndoDecomp, TangleExpr, decompose_endo, eval_tangle, hopf_tangle

__all__ = [
    "CrossCheckError", "MismatchError", "LogInvariantResult", "DimLimitReport",
    "log_tangle_invariant", "log_endomorphism", "log_hopf", "log_hopf_closed",
    "dim_limit_check",
]


class CrossCheckError(ArithmeticError):
    """The two independent routes to the same coefficient disagree."""


class MismatchError(AssertionError):
    """Limit machinery and closed forms disagree."""


@dataclass
class LogInvariantResult:
    """Trace and (identity, nilpotent) coefficients of a projective-colored tangle."""

    trace: complex
    a: complex
    b: complex
    b_by_derivative: complex
    residual_cross_check: float


def _open_indices(label):
    if isinstance(label, Projective):
        return label.i, label.k
    if isinstance(label, DeformX) and not isinstance(label.eps, Jet) and label.eps == 0:
        return label.i, label.l
    raise TypeError(f"open color must be a projective cover, got {label!r}")


def _summand_weights(ctx: QContext, i: int, l: int):
    return 1 + i - ctx.r + l * ctx.r, -1 - i + ctx.r + l * ctx.r


def log_tangle_invariant(cfg: RibbonConfig, expr: TangleExpr) -> LogInvariantResult:
    """Trace and endomorphism coefficients of a tangle with projective open color.

    The quotient route divides the difference of the two recolored scalars
    by [1+i][eps]; the derivative route combines the first jet derivatives
    with the prefactor r {1}^2 / (2 pi i {1+i}).  Both are returned and
    cross-checked to 1e-7 relative.
    """
    ctx = cfg.ctx
    i, l = _open_indices(expr.open_color)
    lam_m, lam_p = _summand_weights(ctx, i, l)
    e = ctx.eps()
    gm = _recolored_scalar(cfg, expr, lam_m + e)
    gp = _recolored_scalar(cfg, expr, lam_p + e)

    dm = modified_dim(ctx, Typical(lam_m + e))
    dp = modified_dim(ctx, Typical(lam_p + e))
    tm, tp = gm * dm, gp * dp
    # cancellation floors: a quantity whose value is genuinely zero leaves
    # only rounding noise behind, which must not masquerade as a pole
    floor_t = ctx.tol * max(1.0, tm.norm(), tp.norm())
    trace = jet_limit(tm + tp, ctx.tol, atol=floor_t)

    floor_g = ctx.tol * max(1.0, gm.norm(), gp.norm())
    am = jet_limit(gm, ctx.tol, atol=floor_g)
    ap = jet_limit(gp, ctx.tol, atol=floor_g)
    if abs(am - ap) > 1e-8 * max(1.0, abs(am)):
        raise CrossCheckError(f"identity coefficient limits disagree: {am} vs {ap}")
    a = (am + ap) / 2

    num = (gm - gp).normalized(ctx.tol, atol=floor_g)
    b = jet_limit(num / (qint(ctx, 1 + i) * qint(ctx, e)), ctx.tol, atol=floor_g)
    br1 = qbracket(ctx, 1)
    b_deriv = (ctx.r * br1 ** 2 / (2j * np.pi * qbracket(ctx, 1 + i))
               * (jet_derivative(gm, 1, ctx.tol, atol=floor_g)
                  - jet_derivative(gp, 1, ctx.tol, atol=floor_g)))
    resid = abs(b - b_deriv) / max(1.0, abs(b))
    if resid > 1e-7:
        raise CrossCheckError(
            f"nilpotent coefficient routes disagree: {b} vs {b_deriv} (rel {resid:.2e})")
    return LogInvariantResult(trace, a, b, b_deriv, resid)


def _recolored_scalar(cfg: RibbonConfig, expr: TangleExpr, alpha):
    """Scalar of the tangle endomorphism with the open strand recolored."""
    mod = make_module(cfg.ctx, Typical(alpha))
    lm = eval_tangle(cfg, expr, open_module=mod)
    return scalar_of(lm.matrix, mod.dim, cfg.ctx.tol)


def log_endomorphism(cfg: RibbonConfig, expr: TangleExpr):
    """The tangle endomorphism evaluated on the jet family, limited to eps = 0.

    Returns the numeric endomorphism of the projective cover together with
    its (a, b) decomposition; existence of the limit is the commutation of
    structure maps with limits, so a PoleError here flags a real defect.
    """
    ctx = cfg.ctx
    i, l = _open_indices(expr.open_color)
    xj = make_deformable(ctx, i, l, ctx.eps())
    lm = eval_tangle(cfg, expr, open_module=xj)
    endo = mat_limit(lm.matrix)
    x0 = make_module(ctx, Projective(i, l))
    return endo, decompose_endo(endo, x0)


def log_hopf(cfg: RibbonConfig, z_label, j: int, l: int) -> EndoDecomp:
    """Hopf-link coefficients on the projective cover, checked against closed forms."""
    expr = hopf_tangle(Projective(j, l), z_label)
    res = log_tangle_invariant(cfg, expr)
    ca, cb = log_hopf_closed(cfg.ctx, z_label, j, l)
    err = max(abs(res.a - ca) / max(1.0, abs(ca)), abs(res.b - cb) / max(1.0, abs(cb)))
    if err > 1e-8:
        raise MismatchError(
            f"limit machinery vs closed form for {z_label}: "
            f"a {res.a} vs {ca}, b {res.b} vs {cb}")
    from .tangle import nilpotent_endo
    x0 = make_module(cfg.ctx, Projective(j, l))
    return EndoDecomp(res.a, res.b, (np.eye(x0.dim), nilpotent_endo(x0)), err)


def log_hopf_closed(ctx: QContext, z_label, j: int, l: int):
    """Closed-form (a, b) for the Hopf link on the projective cover P_j (twist l).

    The sign exponents carry the full twist dependence k(j+1+r(l+1)) on the
    simple/projective closed colors and l(r+1) on the generic one; at zero
    twists they reduce to the familiar short forms.
    """
    r = ctx.r
    J1 = j + 1
    br = lambda x: qbracket(ctx, x)
    qi = lambda x: qint(ctx, x)
    if isinstance(z_label, Typical):
        alpha = z_label.alpha
        a = 0.0 + 0j
        b = ((-1) ** ((r - j) + l * (r + 1)) * r / qi(J1) ** 2 * qpow(ctx, alpha * l * r)
             * (qpow(ctx, (r - 1 - j) * alpha) + qpow(ctx, -(r - 1 - j) * alpha)))
        return a, b
    if isinstance(z_label, (Simple, OneDim)):
        if isinstance(z_label, OneDim):
            i, k = 0, z_label.k
        else:
            i, k = z_label.i, z_label.k
        s = (-1) ** (i * (l + 1) + k * (J1 + r * (l + 1)))
        a = s * br((i + 1) * J1) / br(J1)
        b = s * (i * br((i + 2) * J1) - (i + 2) * br(i * J1)) / (qi(J1) ** 2 * br(J1))
        return a, b
    if isinstance(z_label, Projective):
        i, k = z_label.i, z_label.k
        s = (-1) ** (i * (l + 1) + k * (J1 + r * (l + 1)))
        a = 0.0 + 0j
        b = 2 * r * s / qi(J1) ** 2 * (qpow(ctx, (i + 1) * J1) + qpow(ctx, -(i + 1) * J1))
        return a, b
    raise TypeError(f"no closed Hopf form for closed color {z_label!r}")


@dataclass
class DimLimitReport:
    jet_value: complex
    closed_form: complex
    diff: float


def dim_limit_check(ctx: QContext, i: int, l: int) -> DimLimitReport:
    """Limit of the family's modified dimension against the projective closed form."""
    jv = jet_limit(modified_dim(ctx, DeformX(i, l, ctx.eps())))
    cf = modified_dim(ctx, Projective(i, l))
    return DimLimitReport(jv, cf, abs(jv - cf))
