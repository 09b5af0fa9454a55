"""Low-rank relaxation of max-cut, solved on a product of spheres.

Each vertex gets a unit vector in R^p (p ~ sqrt(2n)); maximizing the
weighted sum of (1 - cos angle)/2 terms relaxes the +-1 cut problem.
At this rank the relaxation is typically tight, so a second-order method
plus a handful of restarts recovers the true max cut on small graphs.

Run:  python3 demos/maxcut_relaxation.py
"""

import numpy as np

import negcurve as nc


def best_of(instance, restarts, seed):
    obj, cset = nc.maxcut_bm(instance)
    rng = np.random.default_rng(seed)
    best = -np.inf
    for i in range(restarts):
        x0 = cset.random_feasible(rng)
        res = nc.negative_curvature_solve(
            obj, cset, x0, nc.SolverConfig(eps=1e-6, max_iter=3000,
                                           rng_seed=i))
        best = max(best, nc.cut_value(instance, res.final.x))
    return best


# a 4-cycle: the even/odd split cuts all four edges
W = np.zeros((4, 4))
for u, v in [(0, 1), (1, 2), (2, 3), (3, 0)]:
    W[u, v] = W[v, u] = 1.0
inst = nc.MaxCutInstance(W, p=3)
print("4-cycle, rank %d:" % inst.p)
print("  relaxation best of 10: %.8f" % best_of(inst, 10, seed=0))
print("  brute force:           %.8f" % nc.maxcut_bruteforce(W))

# a random weighted graph
rng = np.random.default_rng(7)
n = 8
Wr = np.triu(rng.uniform(0.0, 1.0, (n, n)) * (rng.random((n, n)) < 0.5), 1)
Wr = Wr + Wr.T
inst = nc.MaxCutInstance(Wr)
print("\nrandom graph, n=%d, %d edges, default rank %d:"
      % (n, int(np.count_nonzero(Wr) / 2), inst.p))
relaxed = best_of(inst, 20, seed=1)
exact = nc.maxcut_bruteforce(Wr)
print("  relaxation best of 20: %.8f" % relaxed)
print("  brute force:           %.8f" % exact)
# a ratio above 1 just means the vector cut beats every +-1 cut, which a
# relaxation is allowed to do
print("  ratio:                 %.4f" % (relaxed / exact))
