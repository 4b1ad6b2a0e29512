"""
Chebyshevian B-splines against polynomial ones
==============================================

With all weights equal to one the Chebyshevian construction returns the
polynomial B-splines.  For w = 1 + eps sin(2 pi x) the difference shrinks with
the oscillation of w over a support, i.e. roughly linearly in eps.
"""

import numpy as np

from splinelab import ChebyshevBasis, ClassicalBasis, WeightSystem, compare_to_classical
from splinelab import knot_sequence, random_partition, uniform_partition, weight_family
from splinelab.projector import lobatto_samples

part = random_partition(10, seed=3, grading=50.0)
for k in (1, 2, 3, 4):
    kn = knot_sequence(part, k)
    cmp = compare_to_classical(ChebyshevBasis(kn, WeightSystem.uniform(k)), ClassicalBasis(kn),
                               lobatto_samples(part, 16))
    print(f"unit weights, k={k}: max sup|M^w - M| = {np.max(cmp.sup_diff):.2e}")

print("\n k   n    eps   sup diff   ratio to modulus of continuity")
for k in (2, 3):
    for n in (8, 32):
        part = uniform_partition(n)
        kn = knot_sequence(part, k)
        cls = ClassicalBasis(kn)
        for eps in (0.05, 0.1, 0.2):
            ws = WeightSystem.same(k, weight_family("one_plus_eps_sin", eps=eps))
            cmp = compare_to_classical(ChebyshevBasis(kn, ws), cls, lobatto_samples(part, 12))
            print(f"{k:2d} {n:3d}  {eps:5.2f}   {np.max(cmp.sup_diff):8.4f}   {cmp.max_bound_ratio:.3f}")
