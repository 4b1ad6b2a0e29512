"""
Perturbed Gram matrices through a mesh sweep
============================================

Rescale hat functions by a density, check the perturbation quantities and
watch the Neumann step take over once the mesh is fine enough.  The same sweep
is what ``splinelab run configs/theorem_pipeline.json`` writes to disk.
"""

from splinelab import ClassicalBasis, Measure, Projector, check_conditions, gram_matrix
from splinelab import knot_sequence, neumann_check, operator_inf_norm, uniform_partition
from splinelab.perturb import family_basis

mu = Measure.density("one_plus_eps_sin", eps=0.3)
print("   n   theta     norm_C  ||X||    ||Gp^-1||  2||G^-1||  ||P||")
for n in (8, 16, 32, 64, 128):
    part = uniform_partition(n)
    classical = ClassicalBasis(knot_sequence(part, 2))
    perturbed = family_basis(part, 2, "weighted", mu=mu)
    rep = check_conditions(classical, perturbed, mu)
    P = Projector(perturbed, mu)
    nc = neumann_check(gram_matrix(classical), P.gram)
    print(f"{n:4d}  {rep.theta_proxy:.2e}  {rep.norm_C:.3f}   {nc.x_norm:.4f}   "
          f"{nc.gp_inv_norm:.4f}     {2 * nc.g_inv_norm:.4f}     {operator_inf_norm(P).value:.4f}")
