import numpy as np
import pytest
from numpy.testing import assert_allclose

import negcurve as nc


def random_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    return 0.5 * (B + B.T)


class TestSmallestEigenpair:
    def test_diagonal_with_negative_entry(self):
        """diag(0, 1, -2) has smallest pair (-2, +-e3)."""
        res = nc.smallest_eigenpair(np.diag([0.0, 1.0, -2.0]))
        assert res.converged
        assert abs(res.value + 2.0) < 1e-7
        assert abs(abs(res.vector[2]) - 1.0) < 1e-4
        assert_allclose(np.linalg.norm(res.vector), 1.0, atol=1e-12)

    def test_psd_matrix_needs_second_phase(self):
        """diag(3, 1, 0) is PSD, so the shifted phase must find 0, +-e3."""
        res = nc.smallest_eigenpair(np.diag([3.0, 1.0, 0.0]))
        assert res.converged
        assert abs(res.value) < 1e-7
        assert abs(abs(res.vector[2]) - 1.0) < 1e-4

    def test_magnitude_tie(self):
        # +-2 tie in magnitude: the dominant phase has no spectral gap, so
        # the fallback shift must still isolate the smallest eigenvalue
        res = nc.smallest_eigenpair(np.diag([2.0, -2.0, 1.0]), rng_seed=3)
        assert res.converged
        assert abs(res.value + 2.0) < 1e-6

    def test_matches_dense_solver(self):
        for seed in range(30):
            H = random_symmetric(12, seed)
            truth = np.linalg.eigvalsh(H)[0]
            res = nc.smallest_eigenpair(H, tol=1e-10, max_iter=50000,
                                        rng_seed=seed)
            assert res.converged, "seed %d did not converge" % seed
            assert abs(res.value - truth) < 1e-7, "seed %d" % seed

    def test_residual_at_convergence(self):
        H = random_symmetric(15, 99)
        res = nc.smallest_eigenpair(H, tol=1e-10, max_iter=50000)
        resid = np.linalg.norm(H @ res.vector - res.value * res.vector)
        assert resid < 1e-7

    def test_zero_operator(self):
        res = nc.smallest_eigenpair(np.zeros((4, 4)))
        assert res.converged and res.value == 0.0
        assert_allclose(np.linalg.norm(res.vector), 1.0)

    def test_scaled_identity(self):
        """H = c I has every unit vector as an eigenvector of value c."""
        res = nc.smallest_eigenpair(3.5 * np.eye(6))
        assert res.converged
        assert abs(res.value - 3.5) < 1e-7

    def test_budget_exhaustion_is_a_result_not_an_error(self):
        H = random_symmetric(30, 5)
        res = nc.smallest_eigenpair(H, tol=1e-14, max_iter=3)
        assert not res.converged
        assert np.isfinite(res.value)

    def test_operator_interface(self):
        H = random_symmetric(10, 7)
        op = nc.SymmetricOperator(matvec=lambda v: H @ v, dim=10)
        dense = nc.smallest_eigenpair(H, rng_seed=1)
        via_op = nc.smallest_eigenpair(op, rng_seed=1)
        assert abs(dense.value - via_op.value) < 1e-6

    def test_value_never_below_true_minimum(self):
        # Rayleigh quotients cannot undershoot the spectrum
        for seed in range(20):
            H = random_symmetric(9, 100 + seed)
            truth = np.linalg.eigvalsh(H)[0]
            res = nc.smallest_eigenpair(H, rng_seed=seed)
            assert res.value >= truth - 1e-9

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            nc.smallest_eigenpair(np.ones((3, 2)))

    def test_result_is_frozen(self):
        res = nc.smallest_eigenpair(np.eye(3))
        with pytest.raises(Exception):
            res.value = 0.0


class TestRelaxedDirection:
    def test_early_stop_satisfies_contract(self):
        """The relaxed solve may stop as soon as the Rayleigh quotient
        drops to -delta; the vector must still oppose G."""
        H = np.diag([-5.0, -1.0, 2.0])
        G = np.array([1.0, 0.0, 0.0])
        res = nc.relaxed_direction(H, G, delta=0.5)
        q = float(res.vector @ (H @ res.vector))
        assert res.converged
        assert q <= -0.5 + 1e-12
        assert float(res.vector @ G) <= 0.0
        assert_allclose(np.linalg.norm(res.vector), 1.0, atol=1e-12)

    def test_relaxed_value_upper_bounds_minimum(self):
        for seed in range(15):
            H = random_symmetric(8, 200 + seed)
            lam_min = np.linalg.eigvalsh(H)[0]
            if lam_min >= -0.1:
                continue
            G = np.random.default_rng(seed).standard_normal(8)
            res = nc.relaxed_direction(H, G, delta=0.05, rng_seed=seed)
            q = float(res.vector @ (H @ res.vector))
            assert q <= -0.05 + 1e-10
            assert q >= lam_min - 1e-9

    def test_psd_input_returns_nonnegative_value(self):
        H = np.diag([0.5, 1.0, 2.0])
        res = nc.relaxed_direction(H, np.ones(3), delta=1e-6)
        assert res.value >= -1e-9

    def test_sign_flip_against_gradient(self):
        H = np.diag([-3.0, 1.0])
        G = np.array([2.0, 0.0])
        res = nc.relaxed_direction(H, G, delta=0.1, rng_seed=0)
        assert float(res.vector @ G) <= 0.0


def test_seed_determinism():
    H = random_symmetric(14, 11)
    a = nc.smallest_eigenpair(H, rng_seed=42)
    b = nc.smallest_eigenpair(H, rng_seed=42)
    assert a.value == b.value
    assert_allclose(a.vector, b.vector)
    assert a.iterations == b.iterations
