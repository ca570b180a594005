"""Unrolled quantum sl2 at even roots of unity: modules, ribbon data,
renormalized tangle invariants, deformation-limit invariants on projective
colors, and singlet-side regularized dimensions with fusion data."""

from .jets import Jet, OrderError, PoleError, as_jet, jet
from .qnum import (
    JetScalar, QContext, eps_jet, jet_derivative, jet_limit, qbracket, qfact,
    qint, qpow,
)
from .rep import (
    DeformX, Dual, LinearMap, ModuleLabel, OneDim, Projective, RangeError,
    SelfExt, Simple, SingularError, Sum, Tensor, Typical, WeightModule,
    deformable_change_of_basis, direct_sum, dual, format_label, hom_space,
    intertwiner_residual, make_deformable, make_module, module_dump, tensor,
    verify_relations,
)
from .ribbon import (
    CalibrationError, NonScalarError, NotProjectiveError, RibbonConfig,
    braiding, braiding_matrix, calibrate, get_config, hopf_closed_form,
    modified_dim, modified_trace, open_hopf, scalar_of, structure_maps, twist,
)
from .tangle import (
    BasisError, EndoDecomp, NotEndomorphismError, TangleExpr, TangleSyntaxError,
    TypeMismatchError, decompose_endo, eval_tangle, hopf_tangle, parse_color,
    parse_tangle, power_hopf_tangle, random_braid_tangle, renormalized_invariant,
    twist_loop_tangle,
)
from .deform import (
    CrossCheckError, DimLimitReport, LogInvariantResult, MismatchError,
    dim_limit_check, log_endomorphism, log_hopf, log_hopf_closed,
    log_tangle_invariant,
)
from .singlet import (
    Atyp, BoundaryError, CompareReport, DomainError, Fock, FusionVector,
    RegimeError, Regularization, VACUUM, VerlindeReport, alpha_minus,
    alpha_plus, alpha_ts, alpha_zero, b_threshold, compare_hopf_qdim, fuse,
    is_typical_fock, parse_complex, parse_singlet_label, phi_dictionary,
    phi_inverse, qdim_reg, regime_of, strip_eps, verlinde_hom_check,
)

__version__ = "0.1.0"
