"""Equality-constraint sets with exact derivatives and Euclidean projection.

A constraint set describes a feasible region Omega = {x : c(x) = 0} through
four callables: the constraint values c(x), the Jacobian (columns are the
constraint gradients), the per-constraint Hessians, and the Euclidean
projection onto Omega. Points are plain 1-D float arrays; matrix-shaped
variables are flattened column-major (Fortran order), so one vector type
serves every set.

Built-ins: the unit sphere, products of unit spheres (block-normalized),
orthogonality constraints X^T X = I (projection via SVD polar factor), and a
squared-slack augmentation that turns inequalities g_j(x) <= 0 into equality
constraints g_j(x) + z_j^2 = 0 over an enlarged variable.

Convention: sphere-type constraints are stored as (||x||^2 - 1)/2 so the
constraint gradient is x itself and the smallest Jacobian singular value is
exactly 1 on the feasible set. The orthogonality set halves its diagonal
constraints for the same reason.
"""

import numpy as np

from .errors import NumericalError, RankDeficiencyError, ZeroInputError

#: absolute infinity-norm feasibility tolerance used across the library
FEAS_TOL = 1e-10

# relative threshold below which the Jacobian is treated as rank deficient
_RANK_RTOL = 1e-8


def as_point(y, dim=None, name="point"):
    """Validate and return y as a finite 1-D float64 array.

    Raises ValueError on NaN/Inf entries, wrong dimensionality, or (when
    dim is given) wrong length.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError("%s must be a 1-D vector, got shape %s" % (name, y.shape))
    if dim is not None and y.size != dim:
        raise ValueError("%s has length %d, expected %d" % (name, y.size, dim))
    if not np.all(np.isfinite(y)):
        raise ValueError("%s contains NaN or Inf entries" % name)
    return y


class ConstraintSet:
    """Behavioral interface for an equality-constraint set.

    Subclasses provide ambient_dim, num_constraints and the four evaluation
    methods. Instances are immutable after construction and safe for
    concurrent read-only use.
    """

    ambient_dim = None
    num_constraints = None

    def value(self, x):
        """Constraint values c(x), length num_constraints."""
        raise NotImplementedError

    def jacobian(self, x):
        """Jacobian of c at x, shape (ambient_dim, num_constraints);
        column i is the gradient of c_i."""
        raise NotImplementedError

    def constraint_hessian(self, i, x):
        """Hessian of the i-th constraint at x, shape (n, n)."""
        raise NotImplementedError

    def project(self, y):
        """Euclidean projection of y onto the feasible set."""
        raise NotImplementedError

    def feas_residual(self, x):
        """Infinity norm of the constraint values at x."""
        v = self.value(x)
        return float(np.max(np.abs(v))) if v.size else 0.0

    def is_feasible(self, x, tol=FEAS_TOL):
        return self.feas_residual(x) <= tol

    def random_feasible(self, rng):
        """A random feasible point (projection of a standard Gaussian draw)."""
        return self.project(rng.standard_normal(self.ambient_dim))


def project(cset, y):
    """Project y onto the feasible set of cset (generic entry point).

    Equivalent to cset.project(y); validates the input first.
    """
    y = as_point(y, cset.ambient_dim)
    return cset.project(y)


def _gram_factor(N):
    # Return (gram, cholesky) of N^T N, raising on numerical rank deficiency.
    gram = N.T @ N
    gram = 0.5 * (gram + gram.T)
    w = np.linalg.eigvalsh(gram)
    smax = np.sqrt(max(w[-1], 0.0))
    smin = np.sqrt(max(w[0], 0.0))
    if smin < _RANK_RTOL * max(1.0, smax):
        raise RankDeficiencyError(
            "constraint Jacobian is numerically rank deficient "
            "(sigma_min=%.3e, sigma_max=%.3e)" % (smin, smax))
    return gram, np.linalg.cholesky(gram)


def _gram_solve(L, rhs):
    # Solve (N^T N) z = rhs given the Cholesky factor L.
    y = np.linalg.solve(L, rhs)
    return np.linalg.solve(L.T, y)


def tangent_project(cset, x, v):
    """Project v onto the tangent space of the constraint set at x.

    Computes P_x v = v - N (N^T N)^{-1} N^T v with N the constraint
    Jacobian at x, i.e. the orthogonal projection of v onto the nullspace
    of N^T. The result is orthogonal to every constraint gradient.

    Raises RankDeficiencyError when N is numerically rank deficient.
    """
    x = as_point(x, cset.ambient_dim, "x")
    v = np.asarray(v, dtype=float)
    N = cset.jacobian(x)
    _, L = _gram_factor(N)
    return v - N @ _gram_solve(L, N.T @ v)


def tangent_basis_projector(cset, x):
    """Dense tangent-space projector P_x = I - N (N^T N)^{-1} N^T at x."""
    n = cset.ambient_dim
    N = cset.jacobian(as_point(x, n, "x"))
    _, L = _gram_factor(N)
    return np.eye(n) - N @ _gram_solve(L, N.T)


class SphereSet(ConstraintSet):
    """Unit sphere in R^n: single constraint (||x||^2 - 1)/2 = 0.

    The constraint gradient is x, the constraint Hessian is the identity,
    and projection is normalization y/||y|| (undefined at the origin).
    """

    def __init__(self, ambient_dim):
        if ambient_dim < 1:
            raise ValueError("ambient_dim must be >= 1")
        self.ambient_dim = int(ambient_dim)
        self.num_constraints = 1

    def value(self, x):
        return np.array([0.5 * (x @ x - 1.0)])

    def jacobian(self, x):
        return np.asarray(x, dtype=float).reshape(self.ambient_dim, 1)

    def constraint_hessian(self, i, x):
        if i != 0:
            raise IndexError("sphere has a single constraint")
        return np.eye(self.ambient_dim)

    def project(self, y):
        y = np.asarray(y, dtype=float)
        r = np.linalg.norm(y)
        if r == 0.0:
            raise ZeroInputError("cannot project the origin onto the sphere")
        return y / r


class ProductOfSpheresSet(ConstraintSet):
    """Product of k unit spheres; one constraint per block.

    block_sizes gives the ambient dimension of each sphere. The Jacobian is
    block diagonal with unit columns on the feasible set, projection
    normalizes each block independently.
    """

    def __init__(self, block_sizes):
        sizes = [int(s) for s in block_sizes]
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError("block_sizes must be a nonempty list of positive ints")
        self.block_sizes = tuple(sizes)
        self.ambient_dim = sum(sizes)
        self.num_constraints = len(sizes)
        off = np.cumsum((0,) + self.block_sizes)
        self._offsets = [(int(off[i]), int(off[i + 1])) for i in range(len(sizes))]

    def blocks(self, x):
        """Iterate over the per-sphere sub-vectors of x."""
        for a, b in self._offsets:
            yield x[a:b]

    def value(self, x):
        return np.array([0.5 * (blk @ blk - 1.0) for blk in self.blocks(x)])

    def jacobian(self, x):
        N = np.zeros((self.ambient_dim, self.num_constraints))
        for i, (a, b) in enumerate(self._offsets):
            N[a:b, i] = x[a:b]
        return N

    def constraint_hessian(self, i, x):
        a, b = self._offsets[i]
        H = np.zeros((self.ambient_dim, self.ambient_dim))
        H[a:b, a:b] = np.eye(b - a)
        return H

    def project(self, y):
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        for a, b in self._offsets:
            r = np.linalg.norm(y[a:b])
            if r == 0.0:
                raise ZeroInputError("cannot project a zero block onto its sphere")
            out[a:b] = y[a:b] / r
        return out


class OrthogonalitySet(ConstraintSet):
    """Matrices X in R^{n_rows x n_cols} with orthonormal columns.

    Constraints are the upper triangle of X^T X - I, ordered (0,0), (0,1),
    ..., (0,p-1), (1,1), ...; diagonal entries are stored halved,
    c_ii = (x_i . x_i - 1)/2, off-diagonals as c_ij = x_i . x_j. With this
    scaling the Jacobian's Gram matrix on the feasible set is exactly
    diagonal with entries 1 (diagonal constraints) and 2 (off-diagonal),
    so the smallest singular value is 1.

    Projection is the polar factor U V^T of the thin SVD (the closest
    orthonormal-column matrix in Frobenius norm). For rank-deficient input
    the minimizer is not unique; project_with_info flags that case.
    """

    def __init__(self, n_rows, n_cols):
        if n_cols < 1 or n_rows < n_cols:
            raise ValueError("need n_rows >= n_cols >= 1")
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.ambient_dim = self.n_rows * self.n_cols
        self.pairs = [(i, j) for i in range(n_cols) for j in range(i, n_cols)]
        self.num_constraints = len(self.pairs)

    def matrix(self, x):
        """Reshape the flat point into its n_rows x n_cols matrix."""
        return np.asarray(x, dtype=float).reshape(
            self.n_rows, self.n_cols, order="F")

    def flatten(self, X):
        return np.asarray(X, dtype=float).flatten(order="F")

    def value(self, x):
        X = self.matrix(x)
        G = X.T @ X
        out = np.empty(self.num_constraints)
        for k, (i, j) in enumerate(self.pairs):
            out[k] = 0.5 * (G[i, i] - 1.0) if i == j else G[i, j]
        return out

    def jacobian(self, x):
        X = self.matrix(x)
        N = np.zeros((self.ambient_dim, self.num_constraints))
        nr = self.n_rows
        for k, (i, j) in enumerate(self.pairs):
            if i == j:
                N[i * nr:(i + 1) * nr, k] = X[:, i]
            else:
                N[i * nr:(i + 1) * nr, k] = X[:, j]
                N[j * nr:(j + 1) * nr, k] = X[:, i]
        return N

    def constraint_hessian(self, i, x):
        a, b = self.pairs[i]
        H = np.zeros((self.ambient_dim, self.ambient_dim))
        nr = self.n_rows
        eye = np.eye(nr)
        if a == b:
            H[a * nr:(a + 1) * nr, a * nr:(a + 1) * nr] = eye
        else:
            H[a * nr:(a + 1) * nr, b * nr:(b + 1) * nr] = eye
            H[b * nr:(b + 1) * nr, a * nr:(a + 1) * nr] = eye
        return H

    def project(self, y):
        return self.project_with_info(y)[0]

    def project_with_info(self, y):
        """Project and report whether the minimizer was non-unique.

        Returns (point, info) where info["nonunique"] is True when the
        input matrix was numerically rank deficient (any singular value
        below 1e-12 times the largest); the returned polar factor is still
        a valid closest point.
        """
        Y = self.matrix(y)
        try:
            U, s, Vt = np.linalg.svd(Y, full_matrices=False)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy rarely fails here
            raise NumericalError("SVD failed during orthogonality projection") from exc
        nonunique = bool(s.min() <= 1e-12 * max(s.max(), 1e-300))
        return self.flatten(U @ Vt), {"nonunique": nonunique}


class InequalityConstraint:
    """A scalar inequality g(x) <= 0 given by callables (g, grad, hess)."""

    def __init__(self, g, grad, hess):
        self.g = g
        self.grad = grad
        self.hess = hess


class SlackAugmentedSet(ConstraintSet):
    """Squared-slack reformulation of inequality constraints.

    Each inequality g_j(x) <= 0 becomes the equality g_j(x) + z_j^2 = 0 over
    the augmented variable (x, z) in R^{n + J}. The base equality set (if
    any) is carried over unchanged; pass base=None with an explicit
    base_dim for a pure-inequality problem.

    Projection onto the augmented set has no closed form; it is computed by
    a damped Newton iteration on the projection optimality system
    (w - y - Jc(w) mu = 0, c(w) = 0) started from (y, 0). Feasible points
    are exact fixed points. Note the Jacobian legitimately loses rank where
    z_j = 0 and grad g_j(x) = 0 simultaneously.
    """

    def __init__(self, base, inequalities, base_dim=None):
        if base is None:
            if base_dim is None:
                raise ValueError("base_dim is required when base is None")
            self.base_dim = int(base_dim)
            self.base_m = 0
        else:
            self.base_dim = base.ambient_dim
            self.base_m = base.num_constraints
        self.base = base
        self.inequalities = list(inequalities)
        if not self.inequalities:
            raise ValueError("need at least one inequality to augment")
        self.num_slacks = len(self.inequalities)
        self.ambient_dim = self.base_dim + self.num_slacks
        self.num_constraints = self.base_m + self.num_slacks

    def split(self, w):
        """Split the augmented point into (x, z)."""
        return w[:self.base_dim], w[self.base_dim:]

    def value(self, w):
        x, z = self.split(w)
        vals = []
        if self.base is not None:
            vals.append(self.base.value(x))
        vals.append(np.array([q.g(x) + z[j] ** 2
                              for j, q in enumerate(self.inequalities)]))
        return np.concatenate(vals)

    def jacobian(self, w):
        x, z = self.split(w)
        N = np.zeros((self.ambient_dim, self.num_constraints))
        if self.base is not None:
            N[:self.base_dim, :self.base_m] = self.base.jacobian(x)
        for j, q in enumerate(self.inequalities):
            col = self.base_m + j
            N[:self.base_dim, col] = np.asarray(q.grad(x), dtype=float)
            N[self.base_dim + j, col] = 2.0 * z[j]
        return N

    def constraint_hessian(self, i, w):
        x, z = self.split(w)
        H = np.zeros((self.ambient_dim, self.ambient_dim))
        if i < self.base_m:
            H[:self.base_dim, :self.base_dim] = self.base.constraint_hessian(i, x)
        else:
            j = i - self.base_m
            H[:self.base_dim, :self.base_dim] = self.inequalities[j].hess(x)
            H[self.base_dim + j, self.base_dim + j] = 2.0
        return H

    def project(self, y, max_newton=50, tol=1e-12):
        y = np.asarray(y, dtype=float)
        n, m = self.ambient_dim, self.num_constraints
        w = y.copy()
        mu = np.zeros(m)
        for _ in range(max_newton):
            c = self.value(w)
            J = self.jacobian(w)
            F = np.concatenate([w - y - J @ mu, c])
            if np.max(np.abs(F)) <= tol:
                return w
            # KKT Newton matrix [[I - sum mu_i Hc_i, -J], [J^T, 0]]
            W = np.eye(n)
            for i in range(m):
                W -= mu[i] * self.constraint_hessian(i, w)
            K = np.zeros((n + m, n + m))
            K[:n, :n] = W
            K[:n, n:] = -J
            K[n:, :n] = J.T
            try:
                step = np.linalg.solve(K, -F)
            except np.linalg.LinAlgError as exc:
                raise NumericalError("projection Newton system is singular") from exc
            # backtrack on ||F|| to keep the iteration from overshooting
            base_norm = np.linalg.norm(F)
            t = 1.0
            for _ in range(30):
                w_try = w + t * step[:n]
                mu_try = mu + t * step[n:]
                c_try = self.value(w_try)
                F_try = np.concatenate(
                    [w_try - y - self.jacobian(w_try) @ mu_try, c_try])
                if np.linalg.norm(F_try) <= (1.0 - 1e-4 * t) * base_norm:
                    break
                t *= 0.5
            w, mu = w_try, mu_try
        if np.max(np.abs(self.value(w))) <= 1e-9:
            return w
        raise NumericalError("slack-set projection Newton iteration stalled")


def slack_augment(base, inequalities, base_dim=None):
    """Build a SlackAugmentedSet from a base set and inequality list."""
    return SlackAugmentedSet(base, inequalities, base_dim=base_dim)
