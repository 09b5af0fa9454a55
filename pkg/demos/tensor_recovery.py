"""Recovering the components of an orthogonally decomposable tensor.

T = sum_i v_i^(x)4 with orthonormal v_i. Maximizing T(x,x,x,x) on the
sphere (we minimize its negation) has exactly the +-v_i as maximizers,
and every second-order critical point of the problem is one of them —
so random restarts plus a second-order method give component recovery
with no tuning.

Run:  python3 demos/tensor_recovery.py
"""

import numpy as np

import negcurve as nc

n = 8
T, V = nc.synthesize_sotd(n, rng_seed=1)
print("synthesized a rank-%d orthogonal tensor on R^%d" % (n, n))

# --- one component at a time ---------------------------------------------
obj, sphere = nc.sotd_single(T)
cfg = nc.SolverConfig(eps=1e-7, max_iter=3000, rng_seed=0)
rng = np.random.default_rng(2)

print("\nsingle-component runs:")
found = set()
for i in range(12):
    x0 = sphere.random_feasible(rng)
    res = nc.negative_curvature_solve(obj, sphere, x0, cfg)
    err = nc.recovery_error(res.final.x, V)
    which = int(np.argmax(np.abs(V.T @ res.final.x)))
    found.add(which)
    print("  restart %2d: %s  f=%+.6f  component %d  error %.1e"
          % (i, res.status.value, res.final.f, which, err))
print("distinct components found: %d of %d" % (len(found), n))

# --- all components jointly ----------------------------------------------
jobj, product = nc.sotd_joint(T)
x0 = product.random_feasible(rng)
res = nc.negative_curvature_solve(jobj, product, x0,
                                  nc.SolverConfig(eps=1e-6, max_iter=3000,
                                                  rng_seed=3))
X = res.final.x.reshape(n, n, order="F")
print("\njoint run: %s, residual objective %.2e" % (res.status.value,
                                                    res.final.f))
# each column of X should be some +-v_j; report the worst match
worst = 0.0
for l in range(n):
    scores = V.T @ X[:, l]
    j = int(np.argmax(np.abs(scores)))
    worst = max(worst, np.linalg.norm(X[:, l] - np.sign(scores[j]) * V[:, j]))
print("worst column match: %.1e" % worst)
