"""Command line for the solver: `ncm solve|check|bench <config.json>`.

Configs are JSON (schema in the README): a "problem" block picks one of
rayleigh | sotd-single | sotd-joint | maxcut | custom, a "solver" block
holds the method (ncm | pg) plus any SolverConfig overrides, an optional
"output" block names a trace file and format, and "seed" fixes all
randomness. Matrices live inline or in whitespace text files with a
`rows cols` header; graphs are `u v w` edge lines, 0-indexed.

Identical config + seed produces byte-identical trace files (floats are
written with repr, which round-trips exactly).

Exit codes: 0 converged to the termination criterion, 1 bad config,
2 iteration budget exhausted, 3 line-search failure, 4 diagnostic check
failure. Set NCM_LOG=info or NCM_LOG=debug for progress logging.
"""

import argparse
import json
import logging
import math
import os
import statistics
import sys
from dataclasses import replace

import numpy as np

from .diagnostics import projection_approximation_check, riemannian_equivalence_check, taylor_check
from .errors import ConfigError, NegcurveError
from .geometry import OrthogonalitySet, ProductOfSpheresSet, SphereSet
from .lagrangian import Objective
from .problems import (MaxCutInstance, SymmetricTensor4, cut_value, maxcut_bm,
                       rayleigh_problem, sotd_joint, sotd_single,
                       synthesize_sotd)
from .solver import SolverConfig, Status, negative_curvature_solve, projected_gradient_solve

log = logging.getLogger("negcurve.cli")

TRACE_COLUMNS = ("k", "f", "grad_norm", "lambda_k", "branch", "t_k",
                 "backtracks", "feas_residual")

_SOLVER_KEYS = ("sigma", "rho", "alpha", "eps", "t0", "delta", "max_iter",
                "max_backtracks", "feas_tol", "relaxed_eigsolve", "eig_tol",
                "eig_max_iter")


# ---------------------------------------------------------------------------
# file formats

def load_matrix(path):
    """Dense matrix from whitespace text with a `rows cols` first line."""
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ConfigError("matrix file %s: missing 'rows cols' header" % path)
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
        values = [float(t) for t in tokens[2:]]
    except ValueError as exc:
        raise ConfigError("matrix file %s: %s" % (path, exc))
    if len(values) != rows * cols:
        raise ConfigError("matrix file %s: expected %d values, found %d"
                          % (path, rows * cols, len(values)))
    return np.array(values).reshape(rows, cols)


def save_matrix(path, M):
    """Write a matrix in the `rows cols` + values text format."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w") as fh:
        fh.write("%d %d\n" % M.shape)
        for row in M:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_graph(path, n=None):
    """Symmetric weight matrix from `u v w` edge lines (0-indexed).

    Blank lines and lines starting with # are skipped; n defaults to the
    largest vertex index + 1.
    """
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ConfigError("%s:%d: expected 'u v w'" % (path, lineno))
            try:
                u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise ConfigError("%s:%d: %s" % (path, lineno, exc))
            edges.append((u, v, w))
    return edges_to_weights(edges, n)


def edges_to_weights(edges, n=None):
    """Weight matrix from (u, v, w) triples; duplicate edges accumulate."""
    if n is None:
        if not edges:
            raise ConfigError("empty edge list and no vertex count given")
        n = 1 + max(max(u, v) for u, v, _ in edges)
    W = np.zeros((int(n), int(n)))
    for u, v, w in edges:
        u, v, w = int(u), int(v), float(w)
        if not (0 <= u < n and 0 <= v < n):
            raise ConfigError("edge (%d, %d) out of range for n=%d" % (u, v, n))
        if u == v:
            raise ConfigError("self-loop at vertex %d" % u)
        if w < 0:
            raise ConfigError("negative edge weight %g" % w)
        W[u, v] += w
        W[v, u] += w
    return W


# ---------------------------------------------------------------------------
# trace serialization

def _record_row(rec):
    return {"k": rec.k, "f": rec.f, "grad_norm": rec.grad_norm,
            "lambda_k": rec.lambda_k, "branch": rec.branch.value,
            "t_k": rec.t_k, "backtracks": rec.backtracks,
            "feas_residual": rec.feas_residual}


def write_trace(path, trace, fmt="csv"):
    """Write IterateRecords to a CSV or JSONL file (floats via repr)."""
    rows = [_record_row(r) for r in trace]
    with open(path, "w") as fh:
        if fmt == "csv":
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            for row in rows:
                fh.write(",".join(
                    row["branch"] if col == "branch"
                    else str(row[col]) if col in ("k", "backtracks")
                    else repr(float(row[col]))
                    for col in TRACE_COLUMNS) + "\n")
        elif fmt == "jsonl":
            for row in rows:
                fh.write(json.dumps(row, separators=(",", ":")) + "\n")
        else:
            raise ConfigError("unknown trace format %r" % fmt)


def read_trace(path, fmt="csv"):
    """Parse a trace file back into a list of per-iteration dicts."""
    out = []
    with open(path) as fh:
        if fmt == "csv":
            header = fh.readline().strip().split(",")
            if tuple(header) != TRACE_COLUMNS:
                raise ConfigError("unexpected trace header in %s" % path)
            for line in fh:
                parts = line.strip().split(",")
                row = dict(zip(TRACE_COLUMNS, parts))
                for col in TRACE_COLUMNS:
                    if col in ("k", "backtracks"):
                        row[col] = int(row[col])
                    elif col != "branch":
                        row[col] = float(row[col])
                out.append(row)
        elif fmt == "jsonl":
            for line in fh:
                if line.strip():
                    out.append(json.loads(line))
        else:
            raise ConfigError("unknown trace format %r" % fmt)
    return out


# ---------------------------------------------------------------------------
# config handling

def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh), os.path.dirname(os.path.abspath(path))
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise ConfigError("config %s is not valid JSON: %s" % (path, exc))


def _array_field(value, cfgdir, name):
    # inline nested list or a path to a matrix file
    if isinstance(value, str):
        return load_matrix(os.path.join(cfgdir, value))
    try:
        return np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError("field %r must be an array or a file path" % name)


class _PolynomialObjective(Objective):
    """c.x + x'Qx/2 + q * sum_i (v_i.x)^4 (the script-free custom family)."""

    def __init__(self, linear, quadratic, quartic_factors, quartic_coeff):
        self.c = linear
        self.Q = quadratic
        self.V = quartic_factors
        self.q = quartic_coeff

    def f(self, x):
        val = float(self.c @ x) + 0.5 * float(x @ (self.Q @ x))
        if self.V is not None:
            val += self.q * float(np.sum((self.V.T @ x) ** 4))
        return val

    def grad(self, x):
        g = self.c + self.Q @ x
        if self.V is not None:
            g = g + 4.0 * self.q * (self.V @ (self.V.T @ x) ** 3)
        return g

    def hess(self, x):
        H = self.Q.copy()
        if self.V is not None:
            a2 = (self.V.T @ x) ** 2
            H = H + 12.0 * self.q * ((self.V * a2) @ self.V.T)
        return H


class _CorruptedGradient(Objective):
    # check-command fault-injection fixture: constant error on component 0
    def __init__(self, base, err):
        self.base = base
        self.err = float(err)

    def f(self, x):
        return self.base.f(x)

    def grad(self, x):
        g = np.array(self.base.grad(x), dtype=float)
        g[0] += self.err
        return g

    def hess(self, x):
        return self.base.hess(x)


def build_problem(pcfg, cfgdir, seed):
    """Instantiate (objective, set, info) from a problem config block."""
    if not isinstance(pcfg, dict) or "kind" not in pcfg:
        raise ConfigError("problem block must carry a 'kind'")
    kind = pcfg["kind"]
    info = {"kind": kind}
    if kind == "rayleigh":
        if "matrix" not in pcfg:
            raise ConfigError("rayleigh problem needs a 'matrix'")
        A = _array_field(pcfg["matrix"], cfgdir, "matrix")
        obj, cset = rayleigh_problem(A)
        info["matrix"] = A
    elif kind in ("sotd-single", "sotd-joint"):
        if "factors" in pcfg:
            V = _array_field(pcfg["factors"], cfgdir, "factors")
            T = SymmetricTensor4.from_factors(V)
        elif "n" in pcfg:
            T, V = synthesize_sotd(int(pcfg["n"]),
                                   rng_seed=int(pcfg.get("tensor_seed", seed)))
        else:
            raise ConfigError("%s needs 'factors' or 'n'" % kind)
        info["factors"] = V
        if kind == "sotd-single":
            obj, cset = sotd_single(T, negate=bool(pcfg.get("negate", True)))
        else:
            obj, cset = sotd_joint(T)
    elif kind == "maxcut":
        if "graph" in pcfg:
            W = load_graph(os.path.join(cfgdir, pcfg["graph"]),
                           n=pcfg.get("n"))
        elif "edges" in pcfg:
            W = edges_to_weights(pcfg["edges"], n=pcfg.get("n"))
        elif "weights" in pcfg:
            W = _array_field(pcfg["weights"], cfgdir, "weights")
        else:
            raise ConfigError("maxcut problem needs 'graph', 'edges' or 'weights'")
        instance = MaxCutInstance(W, p=pcfg.get("p"))
        obj, cset = maxcut_bm(instance)
        info["instance"] = instance
    elif kind == "custom":
        scfg = pcfg.get("set")
        if not isinstance(scfg, dict) or "type" not in scfg:
            raise ConfigError("custom problem needs a 'set' block with a 'type'")
        if scfg["type"] == "sphere":
            cset = SphereSet(int(scfg["dim"]))
        elif scfg["type"] == "product":
            cset = ProductOfSpheresSet([int(b) for b in scfg["blocks"]])
        else:
            raise ConfigError("unknown set type %r" % scfg["type"])
        n = cset.ambient_dim
        linear = (_array_field(pcfg["linear"], cfgdir, "linear").reshape(n)
                  if "linear" in pcfg else np.zeros(n))
        quad = (_array_field(pcfg["quadratic"], cfgdir, "quadratic")
                if "quadratic" in pcfg else np.zeros((n, n)))
        if quad.shape != (n, n):
            raise ConfigError("quadratic term must be %d x %d" % (n, n))
        quad = 0.5 * (quad + quad.T)
        V = (_array_field(pcfg["quartic_factors"], cfgdir, "quartic_factors")
             if "quartic_factors" in pcfg else None)
        obj = _PolynomialObjective(linear, quad, V,
                                   float(pcfg.get("quartic_coeff", 1.0)))
    else:
        raise ConfigError("unknown problem kind %r" % kind)

    err = pcfg.get("inject_gradient_error")
    if err:
        obj = _CorruptedGradient(obj, err)
    return obj, cset, info


def build_solver_config(scfg, seed):
    """SolverConfig from the config's solver block (method key excluded)."""
    scfg = dict(scfg or {})
    method = scfg.pop("method", "ncm")
    if method not in ("ncm", "pg"):
        raise ConfigError("solver method must be 'ncm' or 'pg', not %r" % method)
    unknown = set(scfg) - set(_SOLVER_KEYS)
    if unknown:
        raise ConfigError("unknown solver options: %s" % ", ".join(sorted(unknown)))
    try:
        cfg = SolverConfig(rng_seed=int(seed), **scfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError("bad solver options: %s" % exc)
    return method, cfg


def _start_point(config, cfgdir, cset, seed):
    if "x0" in config:
        x0 = _array_field(config["x0"], cfgdir, "x0").reshape(-1)
        if x0.size != cset.ambient_dim:
            raise ConfigError("x0 has length %d, expected %d"
                              % (x0.size, cset.ambient_dim))
        return x0
    return cset.random_feasible(np.random.default_rng(seed))


def _trace_options(config, args):
    out = dict(config.get("output") or {})
    trace = args.trace or out.get("trace")
    fmt = args.format or out.get("format", "csv")
    if fmt not in ("csv", "jsonl"):
        raise ConfigError("trace format must be 'csv' or 'jsonl', not %r" % fmt)
    return trace, fmt


def _print_result(result, info=None):
    cert = result.certificate
    final = result.final
    print("status: %s" % result.status.value)
    print("iterations: %d" % max(len(result.trace) - 1, 0))
    print("f: %s" % repr(final.f))
    print("grad_norm: %s" % repr(cert.grad_norm))
    print("min_eigenvalue: %s" % repr(cert.min_eigenvalue))
    print("first_order: %s" % str(cert.is_first_order).lower())
    print("second_order: %s" % str(cert.is_second_order).lower())
    print("feas_residual: %s" % repr(final.feas_residual))
    if info and info.get("kind") == "maxcut":
        print("cut_value: %s" % repr(cut_value(info["instance"], final.x)))


_EXIT_BY_STATUS = {Status.SecondOrderCritical: 0, Status.FirstOrderCritical: 0,
                   Status.MaxIterations: 2, Status.LineSearchFailure: 3}


# ---------------------------------------------------------------------------
# subcommands

def cmd_solve(args):
    config, cfgdir = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    obj, cset, info = build_problem(config.get("problem"), cfgdir, seed)
    method, cfg = build_solver_config(config.get("solver"), seed)
    trace_path, fmt = _trace_options(config, args)
    x0 = _start_point(config, cfgdir, cset, seed)

    solve = negative_curvature_solve if method == "ncm" else projected_gradient_solve
    log.info("solving %s (%s) from seed %d", info["kind"], method, seed)
    result = solve(obj, cset, x0, cfg)
    if trace_path:
        write_trace(trace_path, result.trace, fmt)
        log.info("trace written to %s", trace_path)
    _print_result(result, info)
    return _EXIT_BY_STATUS[result.status]


def _fd_errors(obj, x, h=1e-6):
    # central differences for the gradient and Hessian, relative errors
    n = x.size
    g = obj.grad(x)
    fd = np.empty(n)
    fdH = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        fd[i] = (obj.f(x + e) - obj.f(x - e)) / (2.0 * h)
        fdH[:, i] = (obj.grad(x + e) - obj.grad(x - e)) / (2.0 * h)
    H = obj.hess(x)
    grad_err = np.linalg.norm(g - fd) / (1.0 + np.linalg.norm(g))
    hess_err = (np.linalg.norm(H - 0.5 * (fdH + fdH.T), ord="fro")
                / (1.0 + np.linalg.norm(H, ord="fro")))
    return float(grad_err), float(hess_err)


def _set_radius(cset):
    # projection-safety radius R = sigma0/sqrt(Lambda1) of the built-in sets
    if isinstance(cset, SphereSet):
        return 1.0
    if isinstance(cset, (ProductOfSpheresSet, OrthogonalitySet)):
        return 1.0 / math.sqrt(cset.num_constraints)
    raise ConfigError("check command supports only the built-in sets")


def cmd_check(args):
    config, cfgdir = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    obj, cset, info = build_problem(config.get("problem"), cfgdir, seed)
    ccfg = dict(config.get("check") or {})
    rng = np.random.default_rng(seed)
    x0 = cset.random_feasible(rng)
    R = _set_radius(cset)

    report = {"problem": info["kind"], "seed": seed}
    failures = []

    grad_err, hess_err = _fd_errors(obj, x0)
    report["fd_grad_error"] = grad_err
    report["fd_hess_error"] = hess_err
    if grad_err > 1e-6:
        failures.append("finite-difference gradient")
    if hess_err > 1e-5:
        failures.append("finite-difference hessian")

    scales = ccfg.get("scales")
    if scales is None:
        scales = [1e-1, 1e-2, 1e-3] if R / 2.0 > 1e-1 else [R / 4.0, R / 40.0, R / 400.0]
    tr = taylor_check(obj, cset, x0, scales,
                      samples=int(ccfg.get("samples", 20)), rng_seed=seed)
    report["slope1"] = tr.slope1
    report["slope2"] = tr.slope2
    if not 1.8 <= tr.slope1 <= 2.3:
        failures.append("first-order remainder slope")
    if not 2.7 <= tr.slope2 <= 3.3:
        failures.append("second-order remainder slope")

    frac = projection_approximation_check(cset, x0, R,
                                          trials=int(ccfg.get("trials", 200)),
                                          rng_seed=seed)
    report["projection_fraction"] = frac
    if frac < 1.0:
        failures.append("projection approximation bound")

    if isinstance(cset, SphereSet):
        worst_g = worst_h = 0.0
        for _ in range(5):
            x = cset.random_feasible(rng)
            gg, hg = riemannian_equivalence_check(obj, x)
            worst_g, worst_h = max(worst_g, gg), max(worst_h, hg)
        report["riemannian_grad_gap"] = worst_g
        report["riemannian_hess_gap"] = worst_h
        if worst_g > 1e-10 or worst_h > 1e-10:
            failures.append("riemannian equivalence")
    else:
        report["riemannian_grad_gap"] = None
        report["riemannian_hess_gap"] = None

    report["failures"] = failures
    report["passed"] = not failures

    report_path = (config.get("output") or {}).get("report")
    if report_path is None:
        report_path = os.path.splitext(args.config)[0] + "_report.json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")

    for key in ("fd_grad_error", "fd_hess_error", "slope1", "slope2",
                "projection_fraction"):
        print("%s: %s" % (key, report[key]))
    print("passed: %s" % str(report["passed"]).lower())
    if failures:
        print("failed checks: %s" % "; ".join(failures), file=sys.stderr)
        return 4
    return 0


def cmd_bench(args):
    config, cfgdir = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    restarts = int(config.get("restarts", 0))
    if restarts < 1:
        raise ConfigError("bench needs restarts >= 1")
    obj, cset, info = build_problem(config.get("problem"), cfgdir, seed)
    method, cfg = build_solver_config(config.get("solver"), seed)
    trace_path, fmt = _trace_options(config, args)
    solve = negative_curvature_solve if method == "ncm" else projected_gradient_solve

    rng = np.random.default_rng(seed)
    results = []
    for i in range(restarts):
        x0 = cset.random_feasible(rng)
        result = solve(obj, cset, x0, replace(cfg, rng_seed=seed + i))
        results.append(result)
        log.info("restart %d: status=%s f=%g", i, result.status.value,
                 result.final.f)

    ok = [r for r in results
          if r.status in (Status.SecondOrderCritical, Status.FirstOrderCritical)]
    best = min(results, key=lambda r: r.final.f)
    print("restarts: %d" % restarts)
    print("successes: %d/%d" % (len(ok), restarts))
    print("median_iterations: %s"
          % statistics.median(max(len(r.trace) - 1, 0) for r in results))
    print("median_backtracks: %s"
          % statistics.median(sum(rec.backtracks for rec in r.trace)
                              for r in results))
    print("best_f: %s" % repr(best.final.f))
    if info.get("kind") == "maxcut":
        best_cut = max(cut_value(info["instance"], r.final.x) for r in results)
        print("best_cut_value: %s" % repr(best_cut))
    if trace_path:
        write_trace(trace_path, best.trace, fmt)
    return 0 if ok else 2


# ---------------------------------------------------------------------------

def _setup_logging():
    levels = {"error": logging.ERROR, "info": logging.INFO,
              "debug": logging.DEBUG}
    name = os.environ.get("NCM_LOG", "error").lower()
    if name not in levels:
        print("NCM_LOG=%s not recognized; using 'error'" % name,
              file=sys.stderr)
        name = "error"
    root = logging.getLogger("negcurve")
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(
            logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        root.addHandler(handler)
    root.setLevel(levels[name])


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="ncm", description="negative-curvature constrained solver")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("solve", cmd_solve), ("check", cmd_check),
                     ("bench", cmd_bench)):
        p = sub.add_parser(name)
        p.add_argument("config")
        p.add_argument("--trace", help="trace output path (overrides config)")
        p.add_argument("--format", choices=("csv", "jsonl"))
        p.add_argument("--seed", type=int)
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)

    _setup_logging()
    try:
        return args.fn(args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 1
    except NegcurveError as exc:
        print("run failed: %s" % exc, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
