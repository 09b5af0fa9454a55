"""Generalized gradient, generalized Hessian, and criticality certificates.

For min f(x) s.t. c(x) = 0, the least-squares multipliers at a feasible
point are lambda*(x) = (Jc^T Jc)^{-1} Jc^T grad f, the generalized gradient
is G(x) = grad f - Jc lambda* (identically the tangent-space projection of
grad f), and the generalized Hessian is

    H(x) = P_x^T (hess f - sum_i lambda*_i hess c_i) P_x,

the Lagrangian Hessian compressed to the tangent space. A feasible point is
second-order critical when G(x) = 0 and H(x) is positive semidefinite on
the full space (the normal space sits in H's kernel by construction, so the
full-space and tangent-space conditions agree).
"""

from dataclasses import dataclass

import numpy as np

from .eigen import SymmetricOperator, smallest_eigenpair
from .errors import InvalidConstantsError
from .geometry import as_point, _gram_factor, _gram_solve


class Objective:
    """Behavioral interface: f(x), grad(x), hess(x), hess_vec(x, v).

    hess_vec defaults to forming the dense Hessian; override it when a
    cheaper product is available.
    """

    def f(self, x):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError

    def hess(self, x):
        raise NotImplementedError

    def hess_vec(self, x, v):
        return self.hess(x) @ np.asarray(v, dtype=float)


class FunctionObjective(Objective):
    """Adapter wrapping plain callables (f, grad, hess[, hess_vec])."""

    def __init__(self, f, grad, hess, hess_vec=None):
        self._f = f
        self._grad = grad
        self._hess = hess
        self._hess_vec = hess_vec

    def f(self, x):
        return float(self._f(x))

    def grad(self, x):
        return np.asarray(self._grad(x), dtype=float)

    def hess(self, x):
        return np.asarray(self._hess(x), dtype=float)

    def hess_vec(self, x, v):
        if self._hess_vec is not None:
            return np.asarray(self._hess_vec(x, v), dtype=float)
        return self.hess(x) @ np.asarray(v, dtype=float)


@dataclass(frozen=True)
class LagrangianState:
    """Bundle of the first- and second-order quantities at one point."""

    x: np.ndarray
    lambda_star: np.ndarray
    gen_grad: np.ndarray
    gen_hess: np.ndarray
    feas_residual: float


@dataclass(frozen=True)
class CriticalityCertificate:
    """What a point achieved: ||G(x)|| and the smallest eigenvalue of H(x).

    is_first_order means grad_norm <= eps; is_second_order additionally
    requires min_eigenvalue >= -delta.
    """

    grad_norm: float
    min_eigenvalue: float
    is_first_order: bool
    is_second_order: bool


def multipliers(obj, cset, x):
    """Least-squares multipliers lambda*(x) minimizing ||grad f - Jc lam||.

    Solves the m x m normal equations (Jc^T Jc) lam = Jc^T grad f via a
    Cholesky factorization; m is assumed small relative to n.

    Raises RankDeficiencyError when the constraint Jacobian is numerically
    rank deficient at x.
    """
    x = as_point(x, cset.ambient_dim, "x")
    N = cset.jacobian(x)
    _, L = _gram_factor(N)
    return _gram_solve(L, N.T @ obj.grad(x))


def generalized_gradient(obj, cset, x):
    """G(x) = grad f(x) - Jc(x) lambda*(x), the tangential part of grad f."""
    x = as_point(x, cset.ambient_dim, "x")
    N = cset.jacobian(x)
    _, L = _gram_factor(N)
    g = obj.grad(x)
    lam = _gram_solve(L, N.T @ g)
    G = g - N @ lam
    # the two routes (multiplier subtraction vs direct tangent projection)
    # are algebraically identical; cross-check in debug runs only
    assert np.linalg.norm(N.T @ G) <= 1e-9 * (1.0 + np.linalg.norm(G))
    return G


def generalized_hessian(obj, cset, x):
    """Dense generalized Hessian H(x) = P^T (hess f - sum lam_i hess c_i) P.

    Symmetric by construction; every constraint gradient lies in its
    kernel, so H always has at least m zero eigenvalues.
    """
    x = as_point(x, cset.ambient_dim, "x")
    n = cset.ambient_dim
    N = cset.jacobian(x)
    _, L = _gram_factor(N)
    lam = _gram_solve(L, N.T @ obj.grad(x))
    W = obj.hess(x).astype(float, copy=True)
    for i in range(cset.num_constraints):
        if lam[i] != 0.0:
            W -= lam[i] * cset.constraint_hessian(i, x)
    P = np.eye(n) - N @ _gram_solve(L, N.T)
    H = P.T @ W @ P
    return 0.5 * (H + H.T)


def hessian_operator(obj, cset, x):
    """Matrix-free view of the generalized Hessian (products only).

    Returns a SymmetricOperator whose matvec applies P^T (hess f -
    sum lam_i hess c_i) P without forming the n x n matrix, for use with
    the power-iteration eigensolver at dimensions where the dense form is
    unaffordable.
    """
    x = as_point(x, cset.ambient_dim, "x")
    N = cset.jacobian(x)
    _, L = _gram_factor(N)
    lam = _gram_solve(L, N.T @ obj.grad(x))
    hessians = [cset.constraint_hessian(i, x) for i in range(cset.num_constraints)]

    def tangent(v):
        return v - N @ _gram_solve(L, N.T @ v)

    def matvec(v):
        u = tangent(np.asarray(v, dtype=float))
        w = obj.hess_vec(x, u)
        for li, Hc in zip(lam, hessians):
            if li != 0.0:
                w = w - li * (Hc @ u)
        return tangent(w)

    return SymmetricOperator(matvec, cset.ambient_dim)


def lagrangian_state(obj, cset, x):
    """Evaluate multipliers, G, H, and feasibility at x in one pass."""
    x = as_point(x, cset.ambient_dim, "x")
    n = cset.ambient_dim
    N = cset.jacobian(x)
    _, L = _gram_factor(N)
    g = obj.grad(x)
    lam = _gram_solve(L, N.T @ g)
    G = g - N @ lam
    W = obj.hess(x).astype(float, copy=True)
    for i in range(cset.num_constraints):
        if lam[i] != 0.0:
            W -= lam[i] * cset.constraint_hessian(i, x)
    P = np.eye(n) - N @ _gram_solve(L, N.T)
    H = P.T @ W @ P
    return LagrangianState(
        x=x,
        lambda_star=lam,
        gen_grad=G,
        gen_hess=0.5 * (H + H.T),
        feas_residual=cset.feas_residual(x),
    )


def certify(obj, cset, x, eps, delta, eig_tol=1e-10, eig_max_iter=20000,
            rng_seed=0):
    """Build a criticality certificate at x.

    grad_norm is ||G(x)||; min_eigenvalue is the smallest eigenvalue of the
    full-space generalized Hessian as estimated by the shifted power
    iteration (note the normal space contributes exact zeros, so a strict
    tangent minimum certifies with min_eigenvalue 0).
    """
    state = lagrangian_state(obj, cset, x)
    gn = float(np.linalg.norm(state.gen_grad))
    eig = smallest_eigenpair(state.gen_hess, tol=eig_tol,
                             max_iter=eig_max_iter, rng_seed=rng_seed)
    first = gn <= eps
    second = first and eig.value >= -delta
    return CriticalityCertificate(
        grad_norm=gn,
        min_eigenvalue=float(eig.value),
        is_first_order=first,
        is_second_order=second,
    )


def hessian_norm_bound(obj, cset, constants):
    """Closed-form curvature budget gamma_h for the generalized Hessian:

        gamma_h = sum_i gamma_ci2
                  + (1/sigma0^2) sqrt(sum_i gamma_ci1^2) gamma_f1 sum_i gamma_ci2

    The second term bounds the multiplier-weighted constraint curvature
    uniformly over the feasible set; the first budgets the objective
    curvature at the total constraint curvature, so the result bounds
    ||H(x)|| whenever sup ||hess f|| <= sum_i gamma_ci2 (e.g. any quadratic
    with unit spectral norm on the sphere). Diagnostic use only.

    constants must expose gamma_f1, gamma_ci1, gamma_ci2, sigma0 (see
    diagnostics.LipschitzConstants); the set argument validates that the
    per-constraint vectors match num_constraints. The unconstrained case
    (no constraints) is rejected.
    """
    g_c1 = np.asarray(constants.gamma_ci1, dtype=float)
    g_c2 = np.asarray(constants.gamma_ci2, dtype=float)
    m = cset.num_constraints if cset is not None else g_c1.size
    if m == 0 or g_c1.size == 0 or g_c2.size == 0:
        raise InvalidConstantsError("the bound needs at least one constraint")
    if g_c1.size != m or g_c2.size != m:
        raise InvalidConstantsError(
            "per-constraint vectors have length %d/%d, expected %d"
            % (g_c1.size, g_c2.size, m))
    sigma0 = float(constants.sigma0)
    if sigma0 <= 0.0:
        raise InvalidConstantsError("sigma0 must be positive")
    if np.any(g_c1 < 0) or np.any(g_c2 < 0) or constants.gamma_f1 < 0:
        raise InvalidConstantsError("bound constants must be nonnegative")
    s2 = float(np.sum(g_c2))
    return s2 + float(np.sqrt(np.sum(g_c1 ** 2))) * constants.gamma_f1 * s2 / sigma0 ** 2
