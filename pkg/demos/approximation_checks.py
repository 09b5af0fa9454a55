"""Numerical sanity checks behind the solver's step acceptance.

The line search trusts three approximation facts: the constrained Taylor
remainders decay at orders 2 and 3 along projected tangent steps, the
projection is first-order exact within a known radius, and the
generalized gradient/Hessian reduce to the classical Riemannian ones on
the sphere. This script measures all three on a quadratic-on-the-sphere
problem and prints the closed-form remainder constants for reference.

Run:  python3 demos/approximation_checks.py
"""

import numpy as np

import negcurve as nc

rng = np.random.default_rng(5)
n = 12
B = rng.standard_normal((n, n))
A = 0.5 * (B + B.T)
obj, sphere = nc.rayleigh_problem(A)
x0 = sphere.random_feasible(rng)

# remainder decay: slope1 ~ 2, slope2 ~ 3
anorm = float(np.linalg.norm(A, 2))
consts = nc.taylor_constants(nc.sphere_constants(
    L_f1=anorm, L_f2=0.0, gamma_f1=anorm, gamma_f2=anorm))
rep = nc.taylor_check(obj, sphere, x0, [1e-1, 1e-2, 1e-3], samples=30,
                      rng_seed=0, constants=consts)
print("taylor remainders over scales %s" % (rep.scales,))
print("  slope of first-order remainder:  %.3f (want ~2)" % rep.slope1)
print("  slope of second-order remainder: %.3f (want ~3)" % rep.slope2)
print("  samples within C0*||d||^2: %.0f%%" % (100 * rep.fraction_first))
print("  samples within C5*||d||^3: %.0f%%" % (100 * rep.fraction_second))

print("\nclosed-form constants for this problem:")
print("  R=%.3f  C0=%.3g  C5=%.3g" % (consts.R, consts.C0, consts.C5))

# projection bound ||proj(x+v) - (x + Pv)|| <= 4||v||^2/R, arbitrary v
frac = nc.projection_approximation_check(sphere, x0, R=1.0, trials=500,
                                         rng_seed=1)
print("\nprojection first-order bound held on %.0f%% of 500 draws"
      % (100 * frac))

# cross-check the constraint-based gradient/Hessian against the direct
# sphere formulas at a few random points
worst_g = worst_h = 0.0
for _ in range(10):
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    gg, hg = nc.riemannian_equivalence_check(obj, x)
    worst_g, worst_h = max(worst_g, gg), max(worst_h, hg)
print("\nsphere-formula cross-check over 10 points:")
print("  worst gradient gap %.2e, worst hessian gap %.2e"
      % (worst_g, worst_h))
