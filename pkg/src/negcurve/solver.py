"""Negative-curvature method and projected-gradient baseline.

Each iteration evaluates the generalized gradient G_k. While ||G_k|| >= eps
the method backtracks a projected gradient step

    x_{k+1} = Pi(x_k - t G_k),    accept when f(x_{k+1}) - f(x_k) <= -sigma t ||G_k||^2.

Once the gradient is small it computes the smallest eigenpair (lambda, v)
of the generalized Hessian, sets lambda_k = min(lambda, 0), and either
terminates (lambda_k >= -delta: the point is second-order critical to
tolerance) or takes a curvilinear step along the negative-curvature
direction d_k = |lambda_k| sign(-v^T G_k) v (sign(0) = +1):

    x_{k+1} = Pi(x_k - t G_k + t^alpha d_k),
    accept when f(x_{k+1}) - f(x_k) <= sigma(-t ||G_k||^2 - 0.5 t^{2 alpha} |lambda_k|^3).

t restarts from t0 every iteration and halves (rho) on rejection. The
projected-gradient baseline runs the first branch only and terminates on
||G_k|| <= eps alone, which is exactly why it parks at saddle points; its
final certificate reports honestly whether second-order conditions hold.

The trace records, per iteration k, the state AT x_k plus the step taken
from it. Termination (and budget exhaustion) appends a terminal record with
t_k = 0 so trace[-1] always describes the endpoint.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .eigen import relaxed_direction, smallest_eigenpair
from .errors import RankDeficiencyError
from .geometry import as_point
from .lagrangian import CriticalityCertificate, certify, generalized_gradient, generalized_hessian

log = logging.getLogger("negcurve.solver")


class Branch(str, Enum):
    Gradient = "gradient"
    Curvilinear = "curvilinear"


class Status(str, Enum):
    SecondOrderCritical = "second_order_critical"
    FirstOrderCritical = "first_order_critical"
    MaxIterations = "max_iterations"
    LineSearchFailure = "line_search_failure"


@dataclass(frozen=True)
class SolverConfig:
    """Line-search and termination parameters.

    sigma, rho in (0, 1): acceptance slope and backtracking factor.
    alpha > 0: curvilinear exponent (0.5 pairs the step scales classically).
    eps: gradient-norm termination threshold.
    delta: curvature tolerance; terminate once lambda_k >= -delta.
    t0: initial trial step, reset every iteration.
    relaxed_eigsolve switches the curvature computation to the relaxed
    contract (any direction with Rayleigh quotient <= -delta), which can
    stop the eigensolve early; the default computes the smallest eigenpair.
    eig_tol / eig_max_iter are passed through to the eigensolver.
    """

    sigma: float = 0.1
    rho: float = 0.5
    alpha: float = 0.5
    eps: float = 1e-8
    t0: float = 1.0
    delta: float = 1e-6
    max_iter: int = 1000
    max_backtracks: int = 60
    feas_tol: float = 1e-10
    rng_seed: int = 0
    relaxed_eigsolve: bool = False
    eig_tol: float = 1e-10
    eig_max_iter: int = 5000

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if self.t0 <= 0.0:
            raise ValueError("t0 must be positive")
        if self.delta < 0.0:
            raise ValueError("delta must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.max_backtracks < 0:
            raise ValueError("max_backtracks must be nonnegative")
        if self.feas_tol <= 0.0:
            raise ValueError("feas_tol must be positive")
        if self.eig_tol <= 0.0 or self.eig_max_iter < 1:
            raise ValueError("eigensolver budget must be positive")


@dataclass(frozen=True)
class IterateRecord:
    """State at iterate x_k plus the step taken from it.

    lambda_k is min(smallest eigenvalue estimate, 0) on curvilinear-branch
    records and 0.0 on gradient-branch records (the eigensolve never ran).
    A terminal record (no step taken) carries t_k = 0.
    """

    k: int
    x: np.ndarray
    f: float
    grad_norm: float
    lambda_k: float
    branch: Branch
    t_k: float
    backtracks: int
    feas_residual: float


@dataclass(frozen=True)
class SolveResult:
    final: IterateRecord
    certificate: CriticalityCertificate
    status: Status
    trace: list = field(default_factory=list)


def curvilinear_step(cset, x, G, d, t, alpha):
    """One step Pi(x - t G + t^alpha d); d = 0 gives the projected
    gradient step."""
    if t <= 0.0:
        raise ValueError("step size t must be positive")
    x = np.asarray(x, dtype=float)
    G = np.asarray(G, dtype=float)
    d = np.asarray(d, dtype=float)
    return cset.project(x - t * G + (t ** alpha) * d)


def _backtrack(obj, cset, x, fx, G, gn, lam_abs, d, cfg):
    """Shared backtracking loop. d is None on the gradient branch.

    Returns (accepted, t, backtracks, xhat).
    """
    t = cfg.t0
    gn2 = gn * gn
    for b in range(cfg.max_backtracks + 1):
        if d is None:
            xhat = cset.project(x - t * G)
            threshold = -cfg.sigma * t * gn2
        else:
            xhat = cset.project(x - t * G + (t ** cfg.alpha) * d)
            threshold = cfg.sigma * (-t * gn2
                                     - 0.5 * (t ** (2.0 * cfg.alpha)) * lam_abs ** 3)
        if obj.f(xhat) - fx <= threshold:
            return True, t, b, xhat
        t *= cfg.rho
    return False, 0.0, cfg.max_backtracks, x


def _certificate_from(gn, eig_value, cfg):
    first = gn <= cfg.eps
    return CriticalityCertificate(
        grad_norm=float(gn),
        min_eigenvalue=float(eig_value),
        is_first_order=first,
        is_second_order=first and eig_value >= -cfg.delta,
    )


def _terminal_record(k, x, fx, gn, lam, branch, feas, backtracks=0):
    return IterateRecord(k=k, x=np.array(x), f=float(fx), grad_norm=float(gn),
                         lambda_k=float(lam), branch=branch, t_k=0.0,
                         backtracks=backtracks, feas_residual=float(feas))


def negative_curvature_solve(obj, cset, x0, cfg=None):
    """Run the negative-curvature method from x0.

    x0 is projected onto the feasible set first if it is not already
    feasible to cfg.feas_tol. Returns a SolveResult whose status is
    SecondOrderCritical when ||G|| <= eps and lambda_k >= -delta were both
    reached; MaxIterations / LineSearchFailure results still carry the
    trace so far and an honestly computed certificate.
    """
    cfg = cfg or SolverConfig()
    x = as_point(x0, cset.ambient_dim, "x0")
    if not cset.is_feasible(x, cfg.feas_tol):
        x = cset.project(x)
    trace = []

    for k in range(cfg.max_iter):
        fx = obj.f(x)
        G = generalized_gradient(obj, cset, x)
        gn = float(np.linalg.norm(G))
        feas = cset.feas_residual(x)

        if gn >= cfg.eps:
            accepted, t, b, xhat = _backtrack(obj, cset, x, fx, G, gn, 0.0, None, cfg)
            if not accepted:
                return _fail(obj, cset, x, fx, gn, feas, Branch.Gradient, k, trace, cfg, b)
            trace.append(IterateRecord(k, np.array(x), fx, gn, 0.0,
                                       Branch.Gradient, t, b, feas))
            if log.isEnabledFor(logging.DEBUG):
                log.debug("k=%d gradient f=%.6e |G|=%.3e t=%.3e bt=%d", k, fx, gn, t, b)
            x = xhat
            continue

        H = generalized_hessian(obj, cset, x)
        seed = cfg.rng_seed + 7919 * k
        if cfg.relaxed_eigsolve:
            eig = relaxed_direction(H, G, cfg.delta, tol=cfg.eig_tol,
                                    max_iter=cfg.eig_max_iter, rng_seed=seed)
        else:
            eig = smallest_eigenpair(H, tol=cfg.eig_tol,
                                     max_iter=cfg.eig_max_iter, rng_seed=seed)
        lam = min(eig.value, 0.0)

        if lam >= -cfg.delta:
            trace.append(_terminal_record(k, x, fx, gn, lam, Branch.Curvilinear, feas))
            cert = _certificate_from(gn, eig.value, cfg)
            log.info("second-order critical after %d iterations: f=%.9e |G|=%.3e "
                     "min_eig=%.3e", k, fx, gn, eig.value)
            return SolveResult(trace[-1], cert, Status.SecondOrderCritical, trace)

        v = eig.vector
        s = -1.0 if float(v @ G) > 0.0 else 1.0
        d = abs(lam) * s * v
        accepted, t, b, xhat = _backtrack(obj, cset, x, fx, G, gn, abs(lam), d, cfg)
        if not accepted:
            return _fail(obj, cset, x, fx, gn, feas, Branch.Curvilinear, k, trace, cfg, b)
        trace.append(IterateRecord(k, np.array(x), fx, gn, lam,
                                   Branch.Curvilinear, t, b, feas))
        if log.isEnabledFor(logging.DEBUG):
            log.debug("k=%d curvilinear f=%.6e |G|=%.3e lam=%.3e t=%.3e bt=%d",
                      k, fx, gn, lam, t, b)
        x = xhat

    return _exhausted(obj, cset, x, cfg.max_iter, trace, cfg, Branch.Curvilinear)


def projected_gradient_solve(obj, cset, x0, cfg=None):
    """Projected-gradient baseline: gradient branch only, first-order stop.

    Terminates as soon as ||G|| <= eps. The certificate still reports the
    smallest Hessian eigenvalue, so a saddle endpoint is returned with
    status FirstOrderCritical and is_second_order=False rather than being
    passed off as a solution.
    """
    cfg = cfg or SolverConfig()
    x = as_point(x0, cset.ambient_dim, "x0")
    if not cset.is_feasible(x, cfg.feas_tol):
        x = cset.project(x)
    trace = []

    for k in range(cfg.max_iter):
        fx = obj.f(x)
        G = generalized_gradient(obj, cset, x)
        gn = float(np.linalg.norm(G))
        feas = cset.feas_residual(x)

        if gn <= cfg.eps:
            cert = certify(obj, cset, x, cfg.eps, cfg.delta, eig_tol=cfg.eig_tol,
                           eig_max_iter=cfg.eig_max_iter,
                           rng_seed=cfg.rng_seed + 7919 * k)
            lam = min(cert.min_eigenvalue, 0.0)
            trace.append(_terminal_record(k, x, fx, gn, lam, Branch.Gradient, feas))
            status = (Status.SecondOrderCritical if cert.is_second_order
                      else Status.FirstOrderCritical)
            log.info("gradient-critical after %d iterations: f=%.9e |G|=%.3e "
                     "second_order=%s", k, fx, gn, cert.is_second_order)
            return SolveResult(trace[-1], cert, status, trace)

        accepted, t, b, xhat = _backtrack(obj, cset, x, fx, G, gn, 0.0, None, cfg)
        if not accepted:
            return _fail(obj, cset, x, fx, gn, feas, Branch.Gradient, k, trace, cfg, b)
        trace.append(IterateRecord(k, np.array(x), fx, gn, 0.0,
                                   Branch.Gradient, t, b, feas))
        x = xhat

    return _exhausted(obj, cset, x, cfg.max_iter, trace, cfg, Branch.Gradient)


def _fail(obj, cset, x, fx, gn, feas, branch, k, trace, cfg, backtracks):
    # line search exhausted: report, don't retry — a persistent rejection
    # means a method assumption (typically constraint regularity) broke down
    cert = certify(obj, cset, x, cfg.eps, cfg.delta, eig_tol=cfg.eig_tol,
                   eig_max_iter=cfg.eig_max_iter, rng_seed=cfg.rng_seed + 7919 * k)
    lam = min(cert.min_eigenvalue, 0.0)
    trace.append(_terminal_record(k, x, fx, gn, lam, branch, feas,
                                  backtracks=backtracks))
    log.warning("line search failed at k=%d (|G|=%.3e, %d backtracks)", k, gn, backtracks)
    return SolveResult(trace[-1], cert, Status.LineSearchFailure, trace)


def _exhausted(obj, cset, x, k, trace, cfg, branch):
    fx = obj.f(x)
    try:
        G = generalized_gradient(obj, cset, x)
        gn = float(np.linalg.norm(G))
    except RankDeficiencyError:
        gn = float("nan")
    feas = cset.feas_residual(x)
    cert = certify(obj, cset, x, cfg.eps, cfg.delta, eig_tol=cfg.eig_tol,
                   eig_max_iter=cfg.eig_max_iter, rng_seed=cfg.rng_seed + 7919 * k)
    lam = min(cert.min_eigenvalue, 0.0)
    trace.append(_terminal_record(k, x, fx, gn, lam, branch, feas))
    log.info("iteration budget exhausted: f=%.9e |G|=%.3e", fx, gn)
    return SolveResult(trace[-1], cert, Status.MaxIterations, trace)
