"""Numeric checks of the approximation machinery behind the solver.

Four independent checks, each of which a correct implementation must pass:

* ``taylor_constants`` evaluates the closed-form constants (C0..C5, R) that
  bound the constrained Taylor remainders in terms of Lipschitz data.
* ``taylor_check`` measures the actual decay order of those remainders
  along random tangent perturbations (first-order remainder ~ ||d||^2,
  second-order ~ ||d||^3).
* ``projection_approximation_check`` samples the bound
  ||proj(x0 + v) - (x0 + P v)|| <= 4 ||v||^2 / R.
* ``riemannian_equivalence_check`` cross-validates the generalized
  gradient/Hessian on the sphere against the explicit projector formulas,
  computed through a separate code path.

Built-in constraint sets ship analytic Lipschitz data (sphere_constants,
product_sphere_constants, orthogonality_constants); user problems must
supply their own LipschitzConstants, or the bound fractions are skipped
while the slope fits still run.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConstantsError, NumericalError
from .geometry import SphereSet, tangent_project
from .lagrangian import generalized_gradient, generalized_hessian


@dataclass
class LipschitzConstants:
    """Smoothness data for an objective/constraint pair.

    L_f1 and L_f2 are Lipschitz constants of the objective gradient and
    Hessian; gamma_f1 and gamma_f2 are sup bounds of their norms over the
    feasible set. The per-constraint vectors (length m) carry the same
    quantities for each constraint function, and sigma0 > 0 is a uniform
    lower bound on the smallest singular value of the constraint Jacobian.
    """

    L_f1: float
    L_f2: float
    gamma_f1: float
    gamma_f2: float
    L_ci1: np.ndarray
    L_ci2: np.ndarray
    gamma_ci1: np.ndarray
    gamma_ci2: np.ndarray
    sigma0: float

    def __post_init__(self):
        self.L_ci1 = np.atleast_1d(np.asarray(self.L_ci1, dtype=float))
        self.L_ci2 = np.atleast_1d(np.asarray(self.L_ci2, dtype=float))
        self.gamma_ci1 = np.atleast_1d(np.asarray(self.gamma_ci1, dtype=float))
        self.gamma_ci2 = np.atleast_1d(np.asarray(self.gamma_ci2, dtype=float))
        m = self.L_ci1.size
        if m < 1:
            raise InvalidConstantsError("need at least one constraint")
        for v in (self.L_ci2, self.gamma_ci1, self.gamma_ci2):
            if v.size != m:
                raise InvalidConstantsError(
                    "per-constraint vectors disagree on m (%d vs %d)"
                    % (v.size, m))
        scalars = (self.L_f1, self.L_f2, self.gamma_f1, self.gamma_f2)
        if any(s < 0 for s in scalars) or any(
                np.any(v < 0) for v in
                (self.L_ci1, self.L_ci2, self.gamma_ci1, self.gamma_ci2)):
            raise InvalidConstantsError("smoothness constants must be nonnegative")
        if not self.sigma0 > 0:
            raise InvalidConstantsError("sigma0 must be positive")

    @property
    def num_constraints(self):
        return self.L_ci1.size


@dataclass(frozen=True)
class TaylorConstants:
    """Closed-form remainder constants derived from LipschitzConstants.

    R is the projection-safety radius sigma0/sqrt(Lambda1); C0 bounds the
    first-order remainder by C0*||d||^2 and C5 = 8*C1 + C2 + C3 + C4 bounds
    the second-order remainder by C5*||d||^3, both for tangent steps with
    ||d|| <= R/2.
    """

    Gamma1: float
    Gamma2: float
    Lambda1: float
    Lambda2: float
    R: float
    C0: float
    C1: float
    C2: float
    C3: float
    C4: float
    C5: float


def taylor_constants(c):
    """Evaluate the remainder constants for the given Lipschitz data.

    Pure arithmetic; monotone nondecreasing in every L and gamma input.
    Raises InvalidConstantsError when the constraint-gradient Lipschitz
    data is all zero (the safety radius would be infinite).
    """
    if not isinstance(c, LipschitzConstants):
        raise InvalidConstantsError("expected a LipschitzConstants instance")
    Gamma1 = float(np.sum(c.gamma_ci1 ** 2))
    Gamma2 = float(np.sum(c.gamma_ci2 ** 2))
    Lambda1 = float(np.sum(c.L_ci1 ** 2))
    Lambda2 = float(np.sum(c.L_ci2 ** 2))
    if Lambda1 <= 0.0:
        raise InvalidConstantsError("Lambda1 must be positive to define R")
    s0 = float(c.sigma0)
    R = s0 / math.sqrt(Lambda1)
    C1 = c.L_f2 / 2.0 + c.gamma_f1 / (2.0 * s0 ** 2) * math.sqrt(Gamma1 * Lambda2)
    curv = c.gamma_f2 + c.gamma_f1 / (2.0 * s0 ** 2) * math.sqrt(Gamma1 * Gamma2)
    C2 = curv * 4.0 / R
    C3 = curv * 2.0 / R
    C4 = ((c.gamma_f1 + c.gamma_f1 * Gamma1 / s0 ** 2)
          * (2.0 * math.sqrt(Gamma1 * Lambda1) / s0 ** 2
             + 2.0 * math.sqrt(Gamma1 ** 3 * Lambda1) / s0 ** 4)
          * 8.0 / R)
    C0 = (c.gamma_f1 * (1.0 + Gamma1 / s0 ** 2) * 4.0 / R ** 2
          + 4.0 * (c.L_f1 + c.gamma_f1 * math.sqrt(Gamma1 * Lambda1) / s0 ** 2))
    C5 = 8.0 * C1 + C2 + C3 + C4
    return TaylorConstants(Gamma1=Gamma1, Gamma2=Gamma2, Lambda1=Lambda1,
                           Lambda2=Lambda2, R=R, C0=C0, C1=C1, C2=C2, C3=C3,
                           C4=C4, C5=C5)


@dataclass
class TaylorReport:
    """Measured Taylor-remainder data.

    samples holds one (||delta||, first-order remainder, second-order
    remainder) triple per draw, across all scales. slope1/slope2 are
    log-log least-squares fits of the mean remainder against the scale.
    fraction_first/fraction_second are the fractions of samples within
    C0*||d||^2 and C5*||d||^3 respectively, or nan when no constants were
    supplied.
    """

    scales: tuple
    samples: list = field(default_factory=list)
    slope1: float = math.nan
    slope2: float = math.nan
    fraction_first: float = math.nan
    fraction_second: float = math.nan


def taylor_remainders(obj, cset, x0, delta):
    """First- and second-order remainders of f(proj(x0 + delta)) at x0.

    Uses the generalized gradient and Hessian, so for tangent delta both
    remainders vanish at the advertised orders. delta = 0 gives exactly
    (0, 0).
    """
    x0 = np.asarray(x0, dtype=float)
    delta = np.asarray(delta, dtype=float)
    f0 = obj.f(x0)
    G = generalized_gradient(obj, cset, x0)
    H = generalized_hessian(obj, cset, x0)
    y = cset.project(x0 + delta) if np.any(delta) else x0
    linear = f0 + float(G @ delta)
    rem1 = abs(obj.f(y) - linear)
    rem2 = abs(obj.f(y) - linear - 0.5 * float(delta @ (H @ delta)))
    return rem1, rem2


def _unit_tangent(cset, x0, rng):
    N = cset.jacobian(x0)
    for _ in range(50):
        u = tangent_project(cset, x0, rng.standard_normal(x0.size))
        nrm = np.linalg.norm(u)
        if nrm > 1e-8:
            u /= nrm
            assert np.max(np.abs(N.T @ u)) <= 1e-8
            return u
    raise NumericalError("could not draw a nonzero tangent direction")


def _fit_slope(scales, means):
    logs = np.log(np.asarray(scales))
    logr = np.log(np.maximum(np.asarray(means), 1e-300))
    return float(np.polyfit(logs, logr, 1)[0])


def taylor_check(obj, cset, x0, scales, samples=20, rng_seed=0, constants=None):
    """Measure Taylor-remainder decay along random tangent perturbations.

    For each scale s (strictly decreasing, positive) draws `samples` unit
    tangent directions u at the feasible point x0 and records the
    remainders of f(proj(x0 + s*u)). Slopes are fit on the mean remainder
    per scale, restricted to scales >= 1e-5 (below that, floating-point
    cancellation drowns the signal). With `constants` (a TaylorConstants)
    the per-sample bound fractions are filled in and each scale must sit
    below R/2.
    """
    x0 = np.asarray(x0, dtype=float)
    scales = [float(s) for s in scales]
    if not scales or any(s <= 0 for s in scales):
        raise ValueError("scales must be positive")
    if any(b >= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be strictly decreasing")
    if constants is not None and scales[0] >= constants.R / 2.0:
        raise ValueError("scales must stay below R/2 = %g" % (constants.R / 2.0))
    if not cset.is_feasible(x0, tol=1e-8):
        raise ValueError("x0 must be feasible")

    rng = np.random.default_rng(rng_seed)
    f0 = obj.f(x0)
    G = generalized_gradient(obj, cset, x0)
    H = generalized_hessian(obj, cset, x0)

    report = TaylorReport(scales=tuple(scales))
    mean1, mean2 = [], []
    ok1 = ok2 = total = 0
    for s in scales:
        r1s, r2s = [], []
        for _ in range(samples):
            delta = s * _unit_tangent(cset, x0, rng)
            y = cset.project(x0 + delta)
            linear = f0 + float(G @ delta)
            rem1 = abs(obj.f(y) - linear)
            rem2 = abs(obj.f(y) - linear - 0.5 * float(delta @ (H @ delta)))
            nd = float(np.linalg.norm(delta))
            report.samples.append((nd, rem1, rem2))
            r1s.append(rem1)
            r2s.append(rem2)
            if constants is not None:
                total += 1
                ok1 += rem1 <= constants.C0 * nd ** 2
                ok2 += rem2 <= constants.C5 * nd ** 3
        mean1.append(np.mean(r1s))
        mean2.append(np.mean(r2s))

    window = [i for i, s in enumerate(scales) if s >= 1e-5]
    if len(window) >= 2:
        ws = [scales[i] for i in window]
        report.slope1 = _fit_slope(ws, [mean1[i] for i in window])
        report.slope2 = _fit_slope(ws, [mean2[i] for i in window])
    if constants is not None and total:
        report.fraction_first = ok1 / total
        report.fraction_second = ok2 / total
    return report


def projection_approximation_check(cset, x0, R, trials=200, rng_seed=0):
    """Fraction of random v with ||proj(x0+v) - (x0 + P v)|| <= 4||v||^2/R.

    Draws arbitrary (not necessarily tangent) directions with magnitude
    uniform in (0, R/4]. A correct projection satisfies the bound for
    every such v, so the expected return value is 1.0.
    """
    x0 = np.asarray(x0, dtype=float)
    if not cset.is_feasible(x0, tol=1e-8):
        raise ValueError("x0 must be feasible")
    if not R > 0:
        raise ValueError("R must be positive")
    rng = np.random.default_rng(rng_seed)
    hits = 0
    for _ in range(trials):
        u = rng.standard_normal(cset.ambient_dim)
        u /= np.linalg.norm(u)
        mag = rng.uniform(0.0, R / 4.0)
        if mag == 0.0:  # measure-zero draw; the bound is vacuous at v = 0
            mag = R / 4.0
        v = mag * u
        lhs = np.linalg.norm(cset.project(x0 + v)
                             - (x0 + tangent_project(cset, x0, v)))
        hits += lhs <= 4.0 * float(v @ v) / R
    return hits / trials


def riemannian_equivalence_check(obj, x):
    """Gap between generalized and Riemannian gradient/Hessian on the sphere.

    The generalized quantities come from the constraint machinery
    (multiplier solve, Lagrangian Hessian, Gram-factor projections); the
    Riemannian ones are written out directly with P = I - x x^T:

        rgrad = P grad f(x)
        rhess = P (hess f(x) - (x . grad f(x)) I) P

    Returns (||G - rgrad||, ||H - rhess||_F). Both are zero in exact
    arithmetic for unit x.
    """
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-8:
        raise ValueError("x must lie on the unit sphere")
    cset = SphereSet(x.size)
    G = generalized_gradient(obj, cset, x)
    H = generalized_hessian(obj, cset, x)

    g = obj.grad(x)
    P = np.eye(x.size) - np.outer(x, x)
    rgrad = P @ g
    rhess = P @ (obj.hess(x) - float(x @ g) * np.eye(x.size)) @ P
    grad_gap = float(np.linalg.norm(G - rgrad))
    hess_gap = float(np.linalg.norm(H - rhess, ord="fro"))
    return grad_gap, hess_gap


def sphere_constants(L_f1=0.0, L_f2=0.0, gamma_f1=0.0, gamma_f2=0.0):
    """Lipschitz data for the unit sphere with c(x) = (||x||^2 - 1)/2.

    The constraint gradient is x itself (unit length on the sphere, slope
    1 everywhere) and the constraint Hessian is the identity, so all
    constraint constants are 1 except L_c2 = 0; sigma0 = 1 and R = 1.
    Objective constants default to zero for projection-only uses.
    """
    one = np.ones(1)
    return LipschitzConstants(L_f1=L_f1, L_f2=L_f2, gamma_f1=gamma_f1,
                              gamma_f2=gamma_f2, L_ci1=one, L_ci2=np.zeros(1),
                              gamma_ci1=one, gamma_ci2=one, sigma0=1.0)


def product_sphere_constants(num_blocks, L_f1=0.0, L_f2=0.0, gamma_f1=0.0,
                             gamma_f2=0.0):
    """Lipschitz data for a product of unit spheres (one constraint per
    block, gradients mutually orthogonal): sigma0 = 1, Lambda1 = k, so
    R = 1/sqrt(k)."""
    k = int(num_blocks)
    if k < 1:
        raise InvalidConstantsError("need at least one sphere")
    return LipschitzConstants(L_f1=L_f1, L_f2=L_f2, gamma_f1=gamma_f1,
                              gamma_f2=gamma_f2, L_ci1=np.ones(k),
                              L_ci2=np.zeros(k), gamma_ci1=np.ones(k),
                              gamma_ci2=np.ones(k), sigma0=1.0)


def orthogonality_constants(n_rows, n_cols, L_f1=0.0, L_f2=0.0, gamma_f1=0.0,
                            gamma_f2=0.0):
    """Lipschitz data for the orthonormal-columns set on n_rows x n_cols.

    Constraints are indexed by column pairs (i, j), i <= j, in the set's
    own ordering. Every constraint gradient map is linear with unit slope
    (L_c1 = 1) and unit-spectral-norm Hessian (gamma_c2 = 1, L_c2 = 0); on
    the feasible set the gradient of a diagonal constraint has norm 1 and
    that of an off-diagonal constraint norm sqrt(2). The Jacobian Gram
    matrix is diagonal there with entries 1 and 2, so sigma0 = 1 and
    R = 1/sqrt(m) with m = p(p+1)/2 constraints.
    """
    p = int(n_cols)
    if int(n_rows) < p or p < 1:
        raise InvalidConstantsError("need n_rows >= n_cols >= 1")
    m = p * (p + 1) // 2
    g1 = np.array([1.0 if i == j else math.sqrt(2.0)
                   for i in range(p) for j in range(i, p)])
    assert g1.size == m
    return LipschitzConstants(L_f1=L_f1, L_f2=L_f2, gamma_f1=gamma_f1,
                              gamma_f2=gamma_f2, L_ci1=np.ones(m),
                              L_ci2=np.zeros(m), gamma_ci1=g1,
                              gamma_ci2=np.ones(m), sigma0=1.0)
