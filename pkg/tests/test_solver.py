import numpy as np
import pytest
from numpy.testing import assert_allclose

import negcurve as nc


def diag_problem(d=(1.0, 2.0)):
    return nc.rayleigh_problem(np.diag(list(d)))


def check_trace_mechanics(result, cfg):
    """Replays the acceptance inequality on every accepted step.

    The thresholds are recomputed with the exact expressions the line
    search uses, so the comparison is bitwise-faithful.
    """
    trace = result.trace
    assert trace, "empty trace"
    assert [r.k for r in trace] == list(range(trace[0].k, trace[0].k + len(trace)))
    assert trace[-1].t_k == 0.0
    for prev, cur in zip(trace, trace[1:]):
        assert prev.t_k > 0.0, "only the last record may be terminal"
        # t is t0 backed off `backtracks` times
        assert prev.t_k == cfg.t0 * cfg.rho ** prev.backtracks
        assert prev.backtracks <= cfg.max_backtracks
        gn2 = prev.grad_norm * prev.grad_norm
        if prev.branch == nc.Branch.Gradient:
            threshold = -cfg.sigma * prev.t_k * gn2
        else:
            threshold = cfg.sigma * (-prev.t_k * gn2
                                     - 0.5 * (prev.t_k ** (2.0 * cfg.alpha))
                                     * abs(prev.lambda_k) ** 3)
        assert cur.f - prev.f <= threshold, \
            "sufficient decrease violated at k=%d" % prev.k
    for r in trace:
        assert r.feas_residual <= 1e-10


class TestSolverConfig:
    def test_defaults(self):
        cfg = nc.SolverConfig()
        assert cfg.sigma == 0.1 and cfg.rho == 0.5 and cfg.alpha == 0.5
        assert cfg.eps == 1e-8 and cfg.delta == 1e-6 and cfg.t0 == 1.0

    @pytest.mark.parametrize("kwargs", [
        {"sigma": 0.0}, {"sigma": 1.0}, {"rho": 1.5}, {"alpha": -1.0},
        {"eps": 0.0}, {"t0": -1.0}, {"delta": -1e-3}, {"max_iter": 0},
        {"max_backtracks": -1}, {"feas_tol": 0.0}, {"eig_max_iter": 0},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            nc.SolverConfig(**kwargs)


class TestCurvilinearStep:
    def test_hand_value(self):
        """x=e2, G=0, d=e1, t=0.5, alpha=2: project(e2 + 0.25 e1)."""
        cset = nc.SphereSet(2)
        out = nc.curvilinear_step(cset, np.array([0.0, 1.0]), np.zeros(2),
                                  np.array([1.0, 0.0]), 0.5, 2.0)
        expected = np.array([0.25, 1.0]) / np.sqrt(1.0625)
        assert_allclose(out, expected, rtol=1e-15)

    def test_zero_direction_is_projected_gradient(self):
        cset = nc.SphereSet(3)
        x = np.array([1.0, 0.0, 0.0])
        G = np.array([0.0, 0.5, 0.0])
        out = nc.curvilinear_step(cset, x, G, np.zeros(3), 0.8, 0.5)
        assert_allclose(out, cset.project(x - 0.8 * G))

    def test_rejects_nonpositive_t(self):
        with pytest.raises(ValueError):
            nc.curvilinear_step(nc.SphereSet(2), np.array([1.0, 0.0]),
                                np.zeros(2), np.zeros(2), 0.0, 0.5)


class TestNegativeCurvatureSolve:
    def test_escapes_exact_saddle(self):
        """From exactly e2 (a saddle of x'diag(1,2)x/2), the curvature
        branch must fire and carry the iterate to the minimum f=1/2."""
        obj, cset = diag_problem()
        res = nc.negative_curvature_solve(obj, cset, np.array([0.0, 1.0]))
        assert res.status == nc.Status.SecondOrderCritical
        assert abs(res.final.f - 0.5) < 1e-10
        assert res.certificate.is_second_order
        assert res.trace[0].branch == nc.Branch.Curvilinear
        assert res.trace[0].lambda_k < -0.5

    def test_gradient_phase_from_generic_start(self):
        obj, cset = diag_problem()
        rng = np.random.default_rng(0)
        res = nc.negative_curvature_solve(obj, cset, rng.standard_normal(2))
        assert res.status == nc.Status.SecondOrderCritical
        assert abs(res.final.f - 0.5) < 1e-10

    def test_trace_mechanics(self):
        obj, cset = diag_problem((3.0, -1.0, 0.5, 2.0))
        cfg = nc.SolverConfig()
        res = nc.negative_curvature_solve(obj, cset, np.array([1.0, 0.0, 0.0, 0.0]), cfg)
        assert res.status == nc.Status.SecondOrderCritical
        check_trace_mechanics(res, cfg)
        # f is strictly decreasing along accepted steps
        fs = [r.f for r in res.trace]
        assert all(b < a for a, b in zip(fs, fs[1:]))

    def test_infeasible_start_is_projected(self):
        obj, cset = diag_problem()
        res = nc.negative_curvature_solve(obj, cset, np.array([5.0, 5.0]))
        assert res.trace[0].feas_residual <= 1e-10

    def test_final_record_is_last_trace_entry(self):
        obj, cset = diag_problem()
        res = nc.negative_curvature_solve(obj, cset, np.array([0.3, 1.0]))
        assert res.final is res.trace[-1]
        assert res.final.t_k == 0.0

    def test_max_iterations_status(self):
        obj, cset = diag_problem()
        cfg = nc.SolverConfig(max_iter=2)
        res = nc.negative_curvature_solve(obj, cset, np.array([0.4, 1.0]), cfg)
        assert res.status == nc.Status.MaxIterations
        assert len(res.trace) == 3  # two steps plus the terminal record
        assert res.certificate.grad_norm > 0

    def test_line_search_failure_is_reported_honestly(self):
        # an eps far below float resolution forces the gradient branch to
        # grind against roundoff and give up
        rng = np.random.default_rng(1)
        B = rng.standard_normal((30, 30))
        obj, cset = nc.rayleigh_problem(0.5 * (B + B.T))
        cfg = nc.SolverConfig(eps=1e-16, max_iter=20000)
        res = nc.negative_curvature_solve(obj, cset, rng.standard_normal(30), cfg)
        assert res.status == nc.Status.LineSearchFailure
        assert res.final.backtracks == cfg.max_backtracks
        assert res.certificate.grad_norm == res.final.grad_norm

    def test_relaxed_eigsolve_also_converges(self):
        obj, cset = diag_problem((2.0, -1.0, 1.0))
        cfg = nc.SolverConfig(relaxed_eigsolve=True)
        res = nc.negative_curvature_solve(obj, cset, np.array([1.0, 0.0, 0.0]), cfg)
        assert res.status == nc.Status.SecondOrderCritical
        assert abs(res.final.f + 0.5) < 1e-10

    def test_seed_determinism(self):
        obj, cset = diag_problem((1.0, 2.0, 3.0))
        x0 = np.array([0.2, 0.3, 1.0])
        cfg = nc.SolverConfig(rng_seed=7)
        a = nc.negative_curvature_solve(obj, cset, x0, cfg)
        b = nc.negative_curvature_solve(obj, cset, x0, cfg)
        assert [r.f for r in a.trace] == [r.f for r in b.trace]
        assert_allclose(a.final.x, b.final.x)

    def test_gradient_branch_records_zero_lambda(self):
        obj, cset = diag_problem()
        res = nc.negative_curvature_solve(obj, cset, np.array([0.7, 0.7]))
        for r in res.trace:
            if r.branch == nc.Branch.Gradient:
                assert r.lambda_k == 0.0


class TestProjectedGradient:
    def test_parks_at_saddle(self):
        """Started exactly at a saddle, the baseline stops immediately and
        the certificate says so."""
        obj, cset = diag_problem()
        res = nc.projected_gradient_solve(obj, cset, np.array([0.0, 1.0]))
        assert res.status == nc.Status.FirstOrderCritical
        assert res.certificate.is_first_order
        assert not res.certificate.is_second_order
        assert abs(res.final.f - 1.0) < 1e-12

    def test_reaches_minimum_from_generic_start(self):
        obj, cset = diag_problem()
        res = nc.projected_gradient_solve(obj, cset, np.array([1.0, 1.0]))
        assert res.status == nc.Status.SecondOrderCritical
        assert abs(res.final.f - 0.5) < 1e-10

    def test_never_uses_curvilinear_branch(self):
        obj, cset = diag_problem((4.0, 1.0, -2.0))
        res = nc.projected_gradient_solve(obj, cset, np.array([1.0, 1.0, 1.0]))
        assert all(r.branch == nc.Branch.Gradient for r in res.trace)

    def test_trace_mechanics(self):
        obj, cset = diag_problem((1.0, 5.0))
        cfg = nc.SolverConfig()
        res = nc.projected_gradient_solve(obj, cset, np.array([0.4, 0.9]), cfg)
        check_trace_mechanics(res, cfg)


def test_statuses_and_branches_are_string_enums():
    assert nc.Status.SecondOrderCritical.value == "second_order_critical"
    assert nc.Status.FirstOrderCritical.value == "first_order_critical"
    assert nc.Branch.Gradient.value == "gradient"
    assert nc.Branch.Curvilinear.value == "curvilinear"
