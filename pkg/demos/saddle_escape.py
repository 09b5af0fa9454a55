"""Escape from an exact saddle point on the sphere.

Minimizing x'Ax/2 over the unit sphere has a critical point at every
eigenvector of A. Started exactly at a non-extremal eigenvector, a plain
projected-gradient method sees a zero gradient and declares victory; the
curvilinear method measures the negative curvature there and walks out.

Run:  python3 demos/saddle_escape.py
"""

import numpy as np

import negcurve as nc

rng = np.random.default_rng(0)
n = 30
B = rng.standard_normal((n, n))
A = 0.5 * (B + B.T)
A *= 1e-3 / np.linalg.norm(A, 2)   # keep |f| small so the 1e-8 gradient
                                   # tolerance stays above float noise

obj, sphere = nc.rayleigh_problem(A)
w, Q = np.linalg.eigh(A)
print("eigenvalues: min %.6g, second %.6g, max %.6g" % (w[0], w[1], w[-1]))
print("global minimum of f: %.6g" % (0.5 * w[0]))

saddle = Q[:, 1]   # second-smallest eigenvector — an exact saddle
cfg = nc.SolverConfig(t0=1000.0, max_iter=5000, rng_seed=0)

pg = nc.projected_gradient_solve(obj, sphere, saddle, cfg)
print("\nprojected gradient from the saddle:")
print("  status        %s" % pg.status.value)
print("  f             %.6g   (stuck at 0.5*lambda_2 = %.6g)"
      % (pg.final.f, 0.5 * w[1]))
print("  ||G||         %.2e" % pg.certificate.grad_norm)
print("  second order? %s" % pg.certificate.is_second_order)

cm = nc.negative_curvature_solve(obj, sphere, saddle, cfg)
print("\ncurvilinear method from the same point:")
print("  status        %s" % cm.status.value)
print("  f             %.6g   (target %.6g)" % (cm.final.f, 0.5 * w[0]))
print("  ||G||         %.2e" % cm.certificate.grad_norm)
print("  min curvature %.2e" % cm.certificate.min_eigenvalue)

branches = [r.branch.value for r in cm.trace[:-1]]
print("  first branch taken: %s (of %d iterations, %d curvilinear)"
      % (branches[0], len(branches), branches.count("curvilinear")))

# and from a generic random start both land at the minimum eventually,
# the curvilinear one with a certificate
x0 = rng.standard_normal(n)
cm2 = nc.negative_curvature_solve(obj, sphere, x0, cfg)
print("\nrandom start: status %s, f - target = %.2e"
      % (cm2.status.value, cm2.final.f - 0.5 * w[0]))
