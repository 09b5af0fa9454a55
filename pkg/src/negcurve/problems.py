"""Ready-made constrained problems: Rayleigh quotient on the sphere,
orthogonal fourth-order tensor decomposition (single component and joint),
and the Burer-Monteiro factorization of max-cut.

Each factory returns an (Objective, ConstraintSet) pair wired for the
solver. Matrix-shaped variables follow the library's column-major
flattening; for max-cut the variable is M = L^T in R^{p x n}, so each
column of M (= row of L = the unit vector of one vertex) is one contiguous
sphere block.
"""

import numpy as np

from .errors import AsymmetryError, InvalidWeightsError
from .geometry import ProductOfSpheresSet, SphereSet
from .lagrangian import Objective


class SymmetricTensor4:
    """Dense symmetric fourth-order tensor over R^n (n <= 30).

    Optionally carries the factor matrix V (orthonormal columns) when the
    tensor was synthesized as sum_i v_i (x) v_i (x) v_i (x) v_i; the factored
    form makes contractions O(n^2) instead of O(n^4) and is used whenever
    available.
    """

    def __init__(self, array, factors=None):
        T = np.asarray(array, dtype=float)
        if T.ndim != 4 or len(set(T.shape)) != 1:
            raise ValueError("need an n x n x n x n array")
        if T.shape[0] > 30:
            raise ValueError("dense order-4 tensors are limited to n <= 30")
        scale = max(1.0, float(np.max(np.abs(T))))
        # transpositions of adjacent indices generate all 24 permutations
        for axes in ((1, 0, 2, 3), (0, 2, 1, 3), (0, 1, 3, 2)):
            if np.max(np.abs(T - T.transpose(axes))) > 1e-12 * scale:
                raise ValueError("tensor is not symmetric under index permutations")
        self.array = T
        self.n = T.shape[0]
        self.factors = None if factors is None else np.asarray(factors, dtype=float)

    @classmethod
    def from_factors(cls, V):
        """Build sum_i v_i^{(x)4} from the columns v_i of V."""
        V = np.asarray(V, dtype=float)
        T = np.einsum("ai,bi,ci,di->abcd", V, V, V, V)
        return cls(T, factors=V)

    def apply4(self, x):
        """Scalar T(x, x, x, x)."""
        if self.factors is not None:
            return float(np.sum((self.factors.T @ x) ** 4))
        return float(np.einsum("abcd,a,b,c,d->", self.array, x, x, x, x))

    def apply3(self, x):
        """Vector T(., x, x, x)."""
        if self.factors is not None:
            a = self.factors.T @ x
            return self.factors @ a ** 3
        return np.einsum("abcd,b,c,d->a", self.array, x, x, x)

    def apply2(self, x, y=None):
        """Matrix T(., ., x, y); y defaults to x."""
        if y is None:
            y = x
        if self.factors is not None:
            a = self.factors.T @ x
            b = self.factors.T @ y
            return (self.factors * (a * b)) @ self.factors.T
        return np.einsum("abcd,c,d->ab", self.array, x, y)

    def cross_matrix(self, y, z):
        """Matrix with entries T(a, y, c, z) in (a, c)."""
        if self.factors is not None:
            a = self.factors.T @ y
            b = self.factors.T @ z
            return (self.factors * (a * b)) @ self.factors.T
        return np.einsum("abcd,b,d->ac", self.array, y, z)


class MaxCutInstance:
    """A weighted graph for max-cut: symmetric nonnegative W, zero diagonal.

    p is the factorization rank; the default ceil(sqrt(2n)) is large enough
    that (for generic weights) every second-order critical point of the
    factorized problem is a global optimum of the relaxation.
    """

    def __init__(self, weights, p=None):
        W = np.asarray(weights, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise InvalidWeightsError("weights must be a square matrix")
        scale = max(1.0, float(np.max(np.abs(W))))
        if np.max(np.abs(W - W.T)) > 1e-12 * scale:
            raise InvalidWeightsError("weight matrix must be symmetric")
        if np.any(W < 0):
            raise InvalidWeightsError("weights must be nonnegative")
        if np.max(np.abs(np.diag(W))) > 0:
            raise InvalidWeightsError("diagonal weights must be zero")
        self.weights = W
        self.n = W.shape[0]
        self.p = int(np.ceil(np.sqrt(2 * self.n))) if p is None else int(p)
        if self.p < 1:
            raise InvalidWeightsError("p must be at least 1")


class _QuadraticSphereObjective(Objective):
    """f(x) = x^T A x / 2."""

    def __init__(self, A):
        self.A = A

    def f(self, x):
        return 0.5 * float(x @ (self.A @ x))

    def grad(self, x):
        return self.A @ x

    def hess(self, x):
        return self.A

    def hess_vec(self, x, v):
        return self.A @ v


def rayleigh_problem(A):
    """Minimize x^T A x / 2 on the unit sphere (A symmetric).

    Minima are the +/- unit eigenvectors of A's smallest eigenvalue, with
    value lambda_min/2; the remaining eigenvectors are saddles, making this
    the canonical saddle-escape test problem.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise AsymmetryError("A must be a square matrix")
    if np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, float(np.max(np.abs(A)))):
        raise AsymmetryError("A must be symmetric")
    A = 0.5 * (A + A.T)
    return _QuadraticSphereObjective(A), SphereSet(A.shape[0])


class _SingleComponentObjective(Objective):
    # sign = -1.0 recovers tensor components (the default); +1.0 keeps the
    # literal quartic form, whose sphere-constrained minimizers are NOT the
    # components for an orthogonally decomposable tensor
    def __init__(self, T, sign):
        self.T = T
        self.sign = sign

    def f(self, x):
        return self.sign * self.T.apply4(x)

    def grad(self, x):
        return 4.0 * self.sign * self.T.apply3(x)

    def hess(self, x):
        return 12.0 * self.sign * self.T.apply2(x)


def sotd_single(T, negate=True):
    """One-component tensor decomposition on the unit sphere.

    With negate=True (default) the objective is f(x) = -T(x,x,x,x), whose
    second-order critical points for an orthogonally decomposable tensor
    are exactly the components +/- v_i (each a strict local minimum with
    f = -1). negate=False keeps +T(x,x,x,x) for callers who want the raw
    quartic.
    """
    if not isinstance(T, SymmetricTensor4):
        T = SymmetricTensor4(T)
    return _SingleComponentObjective(T, -1.0 if negate else 1.0), SphereSet(T.n)


class _JointObjective(Objective):
    """f(X) = sum_{i != j} T(x_i, x_i, x_j, x_j) over columns of X."""

    def __init__(self, T):
        self.T = T
        self.n = T.n

    def _cols(self, x):
        return np.asarray(x, dtype=float).reshape(self.n, self.n, order="F")

    def f(self, x):
        X = self._cols(x)
        if self.T.factors is not None:
            A = self.T.factors.T @ X          # a_{ki} = v_k . x_i
            Q = np.sum(A ** 2, axis=1)
            return float(np.sum(Q ** 2) - np.sum(A ** 4))
        B = [self.T.apply2(X[:, j]) for j in range(self.n)]
        S = sum(B)
        return float(sum(X[:, i] @ ((S - B[i]) @ X[:, i]) for i in range(self.n)))

    def grad(self, x):
        X = self._cols(x)
        out = np.empty_like(X)
        if self.T.factors is not None:
            V = self.T.factors
            A = V.T @ X
            Q = np.sum(A ** 2, axis=1)
            # grad wrt column l: 4 sum_k v_k a_{kl} (Q_k - a_{kl}^2)
            out = 4.0 * (V @ (A * (Q[:, None] - A ** 2)))
        else:
            B = [self.T.apply2(X[:, j]) for j in range(self.n)]
            S = sum(B)
            for l in range(self.n):
                out[:, l] = 4.0 * ((S - B[l]) @ X[:, l])
        return out.flatten(order="F")

    def hess(self, x):
        X = self._cols(x)
        n = self.n
        H = np.zeros((n * n, n * n))
        if self.T.factors is not None:
            V = self.T.factors
            A = V.T @ X
            Q = np.sum(A ** 2, axis=1)
            for l in range(n):
                Dll = 4.0 * ((V * (Q - A[:, l] ** 2)) @ V.T)
                H[l * n:(l + 1) * n, l * n:(l + 1) * n] = Dll
                for m in range(l + 1, n):
                    Dlm = 8.0 * ((V * (A[:, l] * A[:, m])) @ V.T)
                    H[l * n:(l + 1) * n, m * n:(m + 1) * n] = Dlm
                    H[m * n:(m + 1) * n, l * n:(l + 1) * n] = Dlm.T
        else:
            B = [self.T.apply2(X[:, j]) for j in range(n)]
            S = sum(B)
            for l in range(n):
                H[l * n:(l + 1) * n, l * n:(l + 1) * n] = 4.0 * (S - B[l])
                for m in range(l + 1, n):
                    Dlm = 8.0 * self.T.cross_matrix(X[:, l], X[:, m])
                    H[l * n:(l + 1) * n, m * n:(m + 1) * n] = Dlm
                    H[m * n:(m + 1) * n, l * n:(l + 1) * n] = Dlm.T
        return H


def sotd_joint(T):
    """All-components decomposition: X = [x_1 .. x_n], each column on its
    own unit sphere, minimizing the cross-term energy
    sum_{i != j} T(x_i, x_i, x_j, x_j).

    For an orthogonally decomposable tensor the global minimum value is 0,
    attained exactly at signed column permutations of the factor matrix.
    """
    if not isinstance(T, SymmetricTensor4):
        T = SymmetricTensor4(T)
    return _JointObjective(T), ProductOfSpheresSet([T.n] * T.n)


class _MaxCutObjective(Objective):
    """f = Tr(C M^T M) over M = L^T with unit columns, C = W/4."""

    def __init__(self, instance):
        self.C = instance.weights / 4.0
        self.n = instance.n
        self.p = instance.p

    def _mat(self, x):
        return np.asarray(x, dtype=float).reshape(self.p, self.n, order="F")

    def f(self, x):
        M = self._mat(x)
        return float(np.sum((M @ self.C) * M))

    def grad(self, x):
        return (2.0 * (self._mat(x) @ self.C)).flatten(order="F")

    def hess(self, x):
        return 2.0 * np.kron(self.C, np.eye(self.p))

    def hess_vec(self, x, v):
        V = np.asarray(v, dtype=float).reshape(self.p, self.n, order="F")
        return (2.0 * (V @ self.C)).flatten(order="F")


def maxcut_bm(instance):
    """Burer-Monteiro max-cut: one unit vector per vertex, rank p.

    Minimizing f = Tr(L^T C L) with C = W/4 maximizes the relaxed cut value
    cut_value = sum(W)/4 - f. Variables are the rows of L, stored as
    contiguous blocks (columns of M = L^T, column-major flattening).
    """
    if not isinstance(instance, MaxCutInstance):
        instance = MaxCutInstance(instance)
    obj = _MaxCutObjective(instance)
    return obj, ProductOfSpheresSet([instance.p] * instance.n)


def cut_value(instance, L):
    """Relaxed cut value (1/4) sum_ij W_ij (1 - r_i . r_j) of unit rows r_i.

    Accepts either the solver's flat point or an (n, p) matrix of rows.
    """
    W = instance.weights
    L = np.asarray(L, dtype=float)
    if L.ndim == 1:
        L = L.reshape(instance.p, instance.n, order="F").T
    gram = L @ L.T
    return float(0.25 * (np.sum(W) - np.sum(W * gram)))


def maxcut_bruteforce(W):
    """Exact max cut by enumerating 2^(n-1) sign assignments (n <= 20)."""
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    if n > 20:
        raise ValueError("brute force is limited to n <= 20 vertices")
    best = 0.0
    for mask in range(2 ** max(n - 1, 0)):
        s = np.ones(n)
        for i in range(n - 1):
            if (mask >> i) & 1:
                s[i + 1] = -1.0
        cut = 0.25 * (np.sum(W) - s @ W @ s)
        best = max(best, float(cut))
    return best


def synthesize_sotd(n, rng_seed=0):
    """Random orthogonally decomposable tensor and its ground-truth factors.

    Draws a Haar-ish orthogonal V (QR of a seeded Gaussian matrix) and
    returns (SymmetricTensor4 built from V, V).
    """
    if not 2 <= n <= 30:
        raise ValueError("n must lie in [2, 30]")
    rng = np.random.default_rng(rng_seed)
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    T = SymmetricTensor4.from_factors(V)
    return T, V


def recovery_error(x, V):
    """Distance from x to the nearest signed factor column:
    min_i min(||x - v_i||, ||x + v_i||)."""
    x = np.asarray(x, dtype=float)
    V = np.asarray(V, dtype=float)
    d = np.minimum(np.linalg.norm(V - x[:, None], axis=0),
                   np.linalg.norm(V + x[:, None], axis=0))
    return float(np.min(d))
