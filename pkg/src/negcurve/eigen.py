"""Smallest eigenpair of a symmetric operator via shifted power iteration.

Two phases: plain power iteration first finds the dominant (largest
magnitude) eigenvalue lambda_dom. If that is negative it already is the
algebraically smallest eigenvalue; otherwise a second power iteration runs
on the shifted operator H - lambda_dom I, whose dominant eigenvalue is
lambda_min - lambda_dom, and the shift is added back. The returned value is
always the Rayleigh quotient of the returned vector with respect to H, so
it is exact for the vector actually delivered.

Convergence requires the Rayleigh quotient to stagnate AND the eigen
residual ||H v - q v|| to be small. The residual gate matters: when the
spectrum has a +/- magnitude tie (|lambda_max| = |lambda_min|), the plain
power iterate wanders inside the two-dimensional extreme eigenspace and its
Rayleigh quotient can stagnate far from either eigenvalue. In that case
phase 1 times out with a large residual and the driver falls back to a
shift of ||H v|| (approximately the spectral radius), which separates the
bottom of the spectrum and lets phase 2 converge normally.

Exceeding the iteration budget is reported through converged=False on the
result, never as an exception.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EigenResult:
    """Outcome of an eigenpair computation.

    value is the Rayleigh quotient of vector (unit norm) with respect to
    the input operator; iterations counts matrix-vector products across
    both phases; relaxed marks results that only promise the weaker
    negative-curvature contract of relaxed_direction.
    """

    value: float
    vector: np.ndarray
    iterations: int
    converged: bool
    relaxed: bool = False


class SymmetricOperator:
    """A symmetric linear map given by its matrix-vector product.

    fro_norm may be supplied when known; otherwise it is estimated from a
    few random probes (E||Hz||^2 = ||H||_F^2 for standard normal z).
    """

    def __init__(self, matvec, dim, fro_norm=None):
        self.matvec = matvec
        self.dim = int(dim)
        self.fro_norm = fro_norm


def _unpack(H, rng):
    # -> (apply, dim, fro_norm)
    if isinstance(H, SymmetricOperator):
        apply_h = H.matvec
        dim = H.dim
        fro = H.fro_norm
        if fro is None:
            acc = 0.0
            for _ in range(8):
                z = rng.standard_normal(dim)
                acc += float(np.sum(apply_h(z) ** 2))
            fro = np.sqrt(acc / 8.0)
        return apply_h, dim, float(fro)
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("H must be a square matrix or a SymmetricOperator")
    return (lambda v: H @ v), H.shape[0], float(np.linalg.norm(H))


def _phase(apply_h, dim, shift, tol_abs, max_iter, rng, stop_below=None):
    """Power iteration on H - shift*I.

    Returns (q, v, hv, iters, converged, early) where q = v^T H v for the
    final unit vector v and hv = H v. With stop_below set, returns as soon
    as q <= stop_below (early=True) regardless of residual.
    """
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    mu_prev = None
    q = 0.0
    hv = np.zeros(dim)
    for it in range(1, max_iter + 1):
        hv = apply_h(v)
        q = float(v @ hv)
        if stop_below is not None and q <= stop_below:
            return q, v, hv, it, True, True
        resid = float(np.linalg.norm(hv - q * v))
        mu = q - shift
        stagnant = mu_prev is not None and abs(mu - mu_prev) <= tol_abs
        if resid <= 10.0 * tol_abs and (stagnant or resid <= 1e-3 * tol_abs):
            return q, v, hv, it, True, False
        mu_prev = mu
        w = hv - shift * v
        nw = float(np.linalg.norm(w))
        if nw <= 1e-300:
            # v is (numerically) an exact eigenvector with eigenvalue == shift;
            # nudge it off the spike so the iteration can make progress
            w = v + 1e-6 * rng.standard_normal(dim)
            nw = float(np.linalg.norm(w))
        v = w / nw
    return q, v, hv, max_iter, False, False


def _default_budget(dim, tol, max_iter):
    tol = 1e-8 if tol is None else float(tol)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = int(50 * np.log(dim + 10))
    return tol, int(max_iter)


def smallest_eigenpair(H, tol=None, max_iter=None, rng_seed=0):
    """Algebraically smallest eigenpair of a symmetric H.

    Parameters
    ----------
    H : square ndarray or SymmetricOperator
    tol : float, optional
        Relative tolerance; the absolute budget is tol*(1 + ||H||_F).
        Default 1e-8.
    max_iter : int, optional
        Iteration budget per phase. Default 50*log(n+10).
    rng_seed : int
        Seed for the start vectors; identical seeds give identical
        iteration paths.

    Returns an EigenResult; an exhausted budget sets converged=False on the
    best estimate instead of raising. A numerically zero operator returns
    value 0 with an arbitrary unit vector and converged=True.
    """
    rng = np.random.default_rng(rng_seed)
    apply_h, dim, fro = _unpack(H, rng)
    tol, max_iter = _default_budget(dim, tol, max_iter)
    if fro <= 1e-14 * (1.0 + dim):
        v = rng.standard_normal(dim)
        return EigenResult(0.0, v / np.linalg.norm(v), 0, True)
    tol_abs = tol * (1.0 + fro)

    q1, v1, hv1, it1, ok1, _ = _phase(apply_h, dim, 0.0, tol_abs, max_iter, rng)
    if ok1 and q1 < 0.0:
        return EigenResult(q1, v1, it1, True)
    if ok1:
        shift = q1
    else:
        # likely a +/- magnitude tie: ||H v|| tracks the spectral radius
        # even while the Rayleigh quotient is stuck between the extremes
        shift = max(float(np.linalg.norm(hv1)), tol_abs)

    # H - shift*I may itself be (numerically) zero when H is a multiple of
    # the identity; every unit vector is then an eigenvector at the shift
    shifted_fro = _shifted_fro(H, apply_h, dim, shift, rng)
    if shifted_fro <= 1e-13 * (1.0 + dim) * max(1.0, fro):
        return EigenResult(q1, v1, it1, True)

    q2, v2, _, it2, ok2, _ = _phase(apply_h, dim, shift, tol_abs, max_iter, rng)
    return EigenResult(q2, v2, it1 + it2, ok2)


def _shifted_fro(H, apply_h, dim, shift, rng):
    if isinstance(H, np.ndarray):
        return float(np.linalg.norm(H - shift * np.eye(dim)))
    acc = 0.0
    for _ in range(4):
        z = rng.standard_normal(dim)
        acc += float(np.sum((apply_h(z) - shift * z) ** 2))
    return np.sqrt(acc / 4.0)


def relaxed_direction(H, G, delta, tol=None, max_iter=None, rng_seed=0):
    """Negative-curvature direction under the relaxed eigenpair contract.

    Returns an EigenResult (relaxed=True) whose unit vector v satisfies

        v^T H v <= max(-delta, lambda_min(H)),   v^T G <= 0,

    and v^T H v <= 0 whenever H has curvature below -delta. The iteration
    may stop early as soon as its Rayleigh quotient drops to -delta or
    lower (the quotient can never undershoot lambda_min, so the first
    inequality then holds automatically). For positive semidefinite H no
    negative direction exists; the full eigensolve result is returned with
    value >= 0 and callers clamp (min with 0) as usual.

    The returned value is always the exact Rayleigh quotient of the
    returned vector, so acceptance tests based on it are self-consistent.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    G = np.asarray(G, dtype=float)
    rng = np.random.default_rng(rng_seed)
    apply_h, dim, fro = _unpack(H, rng)
    tol, max_iter = _default_budget(dim, tol, max_iter)
    if fro <= 1e-14 * (1.0 + dim):
        v = rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        return EigenResult(0.0, _against(v, G), 0, True, relaxed=True)
    tol_abs = tol * (1.0 + fro)

    q1, v1, hv1, it1, ok1, early1 = _phase(
        apply_h, dim, 0.0, tol_abs, max_iter, rng, stop_below=-delta)
    if early1 or (ok1 and q1 < 0.0):
        return EigenResult(q1, _against(v1, G), it1, True, relaxed=True)
    shift = q1 if ok1 else max(float(np.linalg.norm(hv1)), tol_abs)

    shifted_fro = _shifted_fro(H, apply_h, dim, shift, rng)
    if shifted_fro <= 1e-13 * (1.0 + dim) * max(1.0, fro):
        return EigenResult(q1, _against(v1, G), it1, True, relaxed=True)

    q2, v2, _, it2, ok2, _ = _phase(
        apply_h, dim, shift, tol_abs, max_iter, rng, stop_below=-delta)
    return EigenResult(q2, _against(v2, G), it1 + it2, ok2, relaxed=True)


def _against(v, G):
    # flip the sign so the direction does not ascend along G; sign(0) keeps +v
    return -v if float(v @ G) > 0.0 else v
