"""negcurve: equality-constrained optimization that escapes saddle points.

A small numpy library for minimizing smooth objectives subject to equality
constraints, built around a curvilinear line search that blends the
projected gradient with a negative-curvature direction of the projected
Lagrangian Hessian. Runs converge to points satisfying second-order
necessary conditions, not merely first-order ones, and every solve returns
a criticality certificate stating what was achieved.

Main entry points:

- geometry: constraint sets (sphere, product of spheres, orthogonality,
  squared-slack augmentation) with exact derivatives and projections.
- lagrangian: least-squares multipliers, generalized gradient/Hessian,
  criticality certificates.
- eigen: smallest eigenpair of a symmetric operator by two-phase shifted
  power iteration.
- solver: the negative-curvature method and a projected-gradient baseline.
- problems: ready-made Rayleigh-quotient, orthogonal tensor decomposition,
  and max-cut Burer-Monteiro instances.
- diagnostics: numerical verification of the Taylor-expansion and
  projection bounds that underpin the method.
- cli: `ncm solve|check|bench <config.json>`.
"""

from .errors import (
    AsymmetryError,
    ConfigError,
    InvalidConstantsError,
    InvalidWeightsError,
    NegcurveError,
    NumericalError,
    RankDeficiencyError,
    ZeroInputError,
)
from .geometry import (
    FEAS_TOL,
    ConstraintSet,
    InequalityConstraint,
    OrthogonalitySet,
    ProductOfSpheresSet,
    SlackAugmentedSet,
    SphereSet,
    as_point,
    project,
    slack_augment,
    tangent_project,
)
from .lagrangian import (
    CriticalityCertificate,
    FunctionObjective,
    LagrangianState,
    Objective,
    certify,
    generalized_gradient,
    generalized_hessian,
    hessian_norm_bound,
    lagrangian_state,
    multipliers,
)
from .eigen import EigenResult, SymmetricOperator, relaxed_direction, smallest_eigenpair
from .solver import (
    Branch,
    IterateRecord,
    SolveResult,
    SolverConfig,
    Status,
    curvilinear_step,
    negative_curvature_solve,
    projected_gradient_solve,
)
from .problems import (
    MaxCutInstance,
    SymmetricTensor4,
    cut_value,
    maxcut_bm,
    maxcut_bruteforce,
    rayleigh_problem,
    recovery_error,
    sotd_joint,
    sotd_single,
    synthesize_sotd,
)
from .diagnostics import (
    LipschitzConstants,
    TaylorConstants,
    TaylorReport,
    product_sphere_constants,
    orthogonality_constants,
    projection_approximation_check,
    riemannian_equivalence_check,
    sphere_constants,
    taylor_check,
    taylor_constants,
    taylor_remainders,
)

__version__ = "0.1.0"
