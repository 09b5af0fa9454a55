import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

import negcurve as nc
from negcurve import cli


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_kv(stdout):
    pairs = {}
    for line in stdout.splitlines():
        if ": " in line:
            key, val = line.split(": ", 1)
            pairs[key] = val
    return pairs


C4_EDGES = [[0, 1, 1.0], [1, 2, 1.0], [2, 3, 1.0], [3, 0, 1.0]]


class TestFileFormats:
    def test_matrix_round_trip(self, tmp_path):
        path = str(tmp_path / "m.txt")
        M = np.random.default_rng(0).standard_normal((3, 5))
        cli.save_matrix(path, M)
        back = cli.load_matrix(path)
        assert back.shape == (3, 5)
        assert np.array_equal(back, M)  # repr round-trips exactly

    def test_matrix_errors(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2 2\n1.0 2.0 3.0\n")
        with pytest.raises(nc.ConfigError):
            cli.load_matrix(str(path))
        path.write_text("2\n")
        with pytest.raises(nc.ConfigError):
            cli.load_matrix(str(path))
        path.write_text("2 2\n1.0 x 3.0 4.0\n")
        with pytest.raises(nc.ConfigError):
            cli.load_matrix(str(path))

    def test_graph_parsing(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("# a square\n0 1 1.0\n\n1 2 1.0\n2 3 1.0\n3 0 1.0\n")
        W = cli.load_graph(str(path))
        assert W.shape == (4, 4)
        assert W[0, 1] == W[1, 0] == 1.0
        assert W[0, 2] == 0.0

    def test_graph_errors(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("0 1\n")
        with pytest.raises(nc.ConfigError):
            cli.load_graph(str(path))
        path.write_text("0 one 1.0\n")
        with pytest.raises(nc.ConfigError):
            cli.load_graph(str(path))

    def test_edge_list_validation(self):
        with pytest.raises(nc.ConfigError):
            cli.edges_to_weights([])
        with pytest.raises(nc.ConfigError):
            cli.edges_to_weights([(0, 0, 1.0)])
        with pytest.raises(nc.ConfigError):
            cli.edges_to_weights([(0, 1, -1.0)])
        with pytest.raises(nc.ConfigError):
            cli.edges_to_weights([(0, 5, 1.0)], n=2)
        W = cli.edges_to_weights([(0, 1, 1.0), (1, 0, 0.5)], n=3)
        assert W[0, 1] == 1.5  # duplicates accumulate


class TestTraceFiles:
    def solve_small(self):
        obj, cset = nc.rayleigh_problem(np.diag([1.0, 2.0, 3.0]))
        x0 = cset.random_feasible(np.random.default_rng(1))
        return nc.negative_curvature_solve(obj, cset, x0,
                                           nc.SolverConfig(rng_seed=1))

    @pytest.mark.parametrize("fmt", ["csv", "jsonl"])
    def test_round_trip_is_exact(self, tmp_path, fmt):
        result = self.solve_small()
        path = str(tmp_path / ("trace." + fmt))
        cli.write_trace(path, result.trace, fmt)
        rows = cli.read_trace(path, fmt)
        assert len(rows) == len(result.trace)
        for row, rec in zip(rows, result.trace):
            assert row["k"] == rec.k
            assert row["f"] == rec.f  # exact float equality via repr
            assert row["grad_norm"] == rec.grad_norm
            assert row["lambda_k"] == rec.lambda_k
            assert row["branch"] == rec.branch.value
            assert row["t_k"] == rec.t_k
            assert row["backtracks"] == rec.backtracks
            assert row["feas_residual"] == rec.feas_residual

    def test_rewrite_is_byte_identical(self, tmp_path):
        result = self.solve_small()
        p1, p2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        cli.write_trace(p1, result.trace)
        cli.write_trace(p2, result.trace)
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_unknown_format(self, tmp_path):
        with pytest.raises(nc.ConfigError):
            cli.write_trace(str(tmp_path / "t"), [], fmt="xml")


class TestSolveCommand:
    def test_rayleigh_solve_and_trace(self, tmp_path, capsys):
        trace = str(tmp_path / "trace.csv")
        cfgp = write_config(tmp_path, {
            "seed": 3,
            "problem": {"kind": "rayleigh",
                        "matrix": [[2.0, 0.0], [0.0, 1.0]]},
            "solver": {"method": "ncm", "eps": 1e-6},
        })
        code, out, _ = run(capsys, ["solve", cfgp, "--trace", trace])
        assert code == 0
        pairs = parse_kv(out)
        assert pairs["status"] == "second_order_critical"
        assert pairs["second_order"] == "true"
        assert_allclose(float(pairs["f"]), 0.5, atol=1e-10)
        rows = cli.read_trace(trace)
        assert rows[-1]["t_k"] == 0.0
        assert float(pairs["f"]) == rows[-1]["f"]

    def test_solve_reruns_byte_identical(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, {
            "seed": 5,
            "problem": {"kind": "sotd-single", "n": 5, "tensor_seed": 2},
            "solver": {"eps": 1e-7},
        })
        t1, t2 = str(tmp_path / "t1.csv"), str(tmp_path / "t2.csv")
        code1, out1, _ = run(capsys, ["solve", cfgp, "--trace", t1])
        code2, out2, _ = run(capsys, ["solve", cfgp, "--trace", t2])
        assert code1 == code2 == 0
        assert out1 == out2
        assert open(t1, "rb").read() == open(t2, "rb").read()

    def test_pg_parks_at_saddle(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, {
            "problem": {"kind": "rayleigh",
                        "matrix": [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0],
                                   [0.0, 0.0, 3.0]]},
            "solver": {"method": "pg"},
            "x0": [0.0, 1.0, 0.0],
        })
        code, out, _ = run(capsys, ["solve", cfgp])
        assert code == 0
        pairs = parse_kv(out)
        assert pairs["status"] == "first_order_critical"
        assert pairs["first_order"] == "true"
        assert pairs["second_order"] == "false"
        assert_allclose(float(pairs["f"]), 1.0)

    def test_maxcut_prints_cut_value(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, {
            "seed": 7,
            "problem": {"kind": "maxcut", "edges": C4_EDGES, "p": 3},
            "solver": {"eps": 1e-6},
        })
        code, out, _ = run(capsys, ["solve", cfgp])
        assert code == 0
        assert "cut_value" in parse_kv(out)

    def test_custom_problem_with_matrix_file(self, tmp_path, capsys):
        qpath = tmp_path / "Q.txt"
        cli.save_matrix(str(qpath), np.diag([1.0, -1.0, 0.5]))
        cfgp = write_config(tmp_path, {
            "seed": 11,
            "problem": {"kind": "custom",
                        "set": {"type": "sphere", "dim": 3},
                        "quadratic": "Q.txt"},
            "solver": {"eps": 1e-6},
        })
        code, out, _ = run(capsys, ["solve", cfgp])
        assert code == 0
        assert_allclose(float(parse_kv(out)["f"]), -0.5, atol=1e-8)

    def test_seed_flag_overrides_config(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, {
            "seed": 1,
            "problem": {"kind": "rayleigh", "matrix": [[1.0, 0.0], [0.0, 2.0]]},
            "solver": {"eps": 1e-6},
        })
        _, out_a, _ = run(capsys, ["solve", cfgp, "--seed", "1"])
        _, out_b, _ = run(capsys, ["solve", cfgp])
        assert out_a == out_b

    def test_missing_config_file(self, tmp_path, capsys):
        code, _, err = run(capsys, ["solve", str(tmp_path / "nope.json")])
        assert code == 1
        assert "config error" in err

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        code, _, _ = run(capsys, ["solve", str(path)])
        assert code == 1

    def test_unknown_kind(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, {"problem": {"kind": "knapsack"}})
        code, _, err = run(capsys, ["solve", cfgp])
        assert code == 1
        assert "knapsack" in err

    def test_unknown_solver_option(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, {
            "problem": {"kind": "rayleigh", "matrix": [[1.0]]},
            "solver": {"momentum": 0.9},
        })
        code, _, err = run(capsys, ["solve", cfgp])
        assert code == 1
        assert "momentum" in err

    def test_bad_x0_length(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, {
            "problem": {"kind": "rayleigh", "matrix": [[1.0, 0.0], [0.0, 2.0]]},
            "x0": [1.0, 0.0, 0.0],
        })
        code, _, _ = run(capsys, ["solve", cfgp])
        assert code == 1

    def test_budget_exhaustion_exit_code(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, {
            "seed": 13,
            "problem": {"kind": "rayleigh",
                        "matrix": [[1.0, 0.2], [0.2, 2.0]]},
            "solver": {"max_iter": 1, "eps": 1e-14},
        })
        code, out, _ = run(capsys, ["solve", cfgp])
        assert code == 2
        assert parse_kv(out)["status"] == "max_iterations"


class TestCheckCommand:
    def test_clean_problem_passes(self, tmp_path, capsys):
        report_path = str(tmp_path / "report.json")
        cfgp = write_config(tmp_path, {
            "seed": 17,
            "problem": {"kind": "rayleigh",
                        "matrix": [[1.0, 0.3, 0.0], [0.3, 2.0, 0.1],
                                   [0.0, 0.1, 3.0]]},
            "output": {"report": report_path},
        })
        code, out, _ = run(capsys, ["check", cfgp])
        assert code == 0
        pairs = parse_kv(out)
        assert pairs["passed"] == "true"
        assert pairs["projection_fraction"] == "1.0"
        report = json.load(open(report_path))
        assert report["passed"] is True
        assert 1.8 <= report["slope1"] <= 2.3
        assert 2.7 <= report["slope2"] <= 3.3
        assert report["riemannian_grad_gap"] <= 1e-10

    def test_report_default_path(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, {
            "seed": 19,
            "problem": {"kind": "rayleigh", "matrix": [[1.0, 0.0], [0.0, 2.0]]},
        }, name="myrun.json")
        code, _, _ = run(capsys, ["check", cfgp])
        assert code == 0
        assert (tmp_path / "myrun_report.json").exists()

    def test_corrupted_gradient_fails(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, {
            "seed": 23,
            "problem": {"kind": "rayleigh",
                        "matrix": [[1.0, 0.0], [0.0, 2.0]],
                        "inject_gradient_error": 1e-3},
            "output": {"report": str(tmp_path / "r.json")},
        })
        code, out, err = run(capsys, ["check", cfgp])
        assert code == 4
        assert parse_kv(out)["passed"] == "false"
        assert "finite-difference gradient" in err

    def test_joint_problem_skips_sphere_only_check(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, {
            "seed": 29,
            "problem": {"kind": "sotd-joint", "n": 3, "tensor_seed": 4},
            "output": {"report": str(tmp_path / "r.json")},
        })
        code, _, _ = run(capsys, ["check", cfgp])
        assert code == 0
        report = json.load(open(str(tmp_path / "r.json")))
        assert report["riemannian_grad_gap"] is None


class TestBenchCommand:
    def test_maxcut_restarts(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, {
            "seed": 31,
            "restarts": 8,
            "problem": {"kind": "maxcut", "edges": C4_EDGES, "p": 3},
            "solver": {"eps": 1e-6},
        })
        code, out, _ = run(capsys, ["bench", cfgp])
        assert code == 0
        pairs = parse_kv(out)
        assert pairs["restarts"] == "8"
        assert pairs["successes"].endswith("/8")
        assert_allclose(float(pairs["best_cut_value"]), 4.0, atol=1e-6)

    def test_bench_writes_best_trace(self, tmp_path, capsys):
        trace = str(tmp_path / "best.jsonl")
        cfgp = write_config(tmp_path, {
            "seed": 37,
            "restarts": 3,
            "problem": {"kind": "rayleigh", "matrix": [[1.0, 0.0], [0.0, 2.0]]},
            "solver": {"eps": 1e-6},
        })
        code, out, _ = run(capsys,
                           ["bench", cfgp, "--trace", trace, "--format", "jsonl"])
        assert code == 0
        rows = cli.read_trace(trace, fmt="jsonl")
        assert rows[-1]["f"] == float(parse_kv(out)["best_f"])

    def test_zero_restarts_rejected(self, tmp_path, capsys):
        cfgp = write_config(tmp_path, {
            "restarts": 0,
            "problem": {"kind": "rayleigh", "matrix": [[1.0]]},
        })
        code, _, err = run(capsys, ["bench", cfgp])
        assert code == 1
        assert "restarts" in err
