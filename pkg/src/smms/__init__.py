"""Weighted Einstein structures on smooth metric measure spaces.

Numerical verification toolkit: finite-difference curvature oracle,
weighted tensor calculus, closed-form warped-product engine, a catalog of
explicit model families, branch classification and global matching.
"""

from .errors import (
    DomainError,
    InsufficientSamples,
    InvalidProblem,
    NonFiniteState,
    NonIntegerM,
    NonPositiveWarp,
    ParamConstraintViolation,
    PreconditionError,
    RankMismatch,
    SMMSError,
    SingularMetric,
    StepSizeUnderflow,
)
from .tensor_core import (
    Box,
    ChartMetric,
    FDConfig,
    ScalarField,
    TensorField,
    TensorValue,
    christoffel,
    conformal_space_form_metric,
    constant_metric,
    covariant_derivative,
    curvature_bundle,
    divergence,
    interior_product,
    kulkarni_nomizu,
    orthonormal_frame,
    scalar_calculus,
    sup_norm_orthonormal,
    to_orthonormal,
    weyl,
)
from .weighted import (
    Branch,
    ConditionReport,
    SMMSChart,
    WeightedScalars,
    bakry_emery_ricci,
    condition_report,
    formal_warped_product,
    weighted_cotton,
    weighted_divergence,
    weighted_scalar_curvature,
    weighted_schouten,
    weighted_weyl,
    weighted_weyl_divergence,
)
from .warped_closed import (
    FiberSpec,
    OdeResiduals,
    ScalarCurve,
    WarpedSMMS,
    branch_probe,
    ode_residuals,
    warped_chart,
    warped_curvature_closed,
)
from .catalog import (
    FamilyExpected,
    FamilyId,
    FamilyParams,
    GoldenComponent,
    build_family,
    default_samples,
    family_expected,
)
from .classify import (
    BlowupReport,
    BranchVerdict,
    GlobalCase,
    GlobalVerdict,
    ObataProblem,
    ObataSolution,
    blowup_probe,
    classify_branch,
    integrate_ode,
    match_global,
    obata_residual,
    solve_obata_ivp,
    v_critical_points,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
