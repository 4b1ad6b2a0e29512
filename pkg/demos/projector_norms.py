"""
Orthogonal projection onto splines under a weighted measure
===========================================================

Project a discontinuous function, look at the L-infinity norm of the
projector and at the decay of the dual basis.
"""

import numpy as np

from splinelab import ClassicalBasis, Measure, PiecewiseFunction, Projector, dual_basis
from splinelab import knot_sequence, operator_inf_norm, project, random_partition, uniform_partition

mu = Measure.density("one_plus_eps_sin", eps=0.3)
part = random_partition(16, seed=1, grading=100.0)
P = Projector(ClassicalBasis(knot_sequence(part, 3)), mu)

step = PiecewiseFunction(lambda x: np.sign(x - 0.4), (0.4,))
pf = project(P, step)
t = np.linspace(0, 1, 11)
print("P(sign(x - 0.4)) at", np.round(t, 2))
print(np.round(pf(t), 3))
print("projecting twice changes coefficients by", np.max(np.abs(project(P, pf.function).coef - pf.coef)))

# sampled operator norm; the sampling sets are nested so the estimate only grows
for s in (4, 8, 16):
    est = operator_inf_norm(P, samples_per_atom=s)
    print(f"samples/atom {s:2d}: ||P|| >= {est.value:.4f} ({est.n_samples} points)")

# norms stay put when the mesh is refined
print("\n k    n   ||P||")
for k in (1, 2, 3):
    for n in (8, 32, 128):
        Q = Projector(ClassicalBasis(knot_sequence(uniform_partition(n), k)), mu)
        print(f"{k:2d} {n:4d}   {operator_inf_norm(Q).value:.4f}")

# dual functions decay geometrically away from their index
Q = Projector(ClassicalBasis(knot_sequence(uniform_partition(60), 2)))
D = dual_basis(Q)
x = np.linspace(0, 1, 1201)
vals = np.abs(D(x))[:, 30]
j = D.first_index(x)
for dist in (0, 2, 4, 8):
    print(f"|i - j(t)| = {dist}: max |N*_30| = {vals[np.abs(j - 30) == dist].max():.3e}")
