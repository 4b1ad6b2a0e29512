"""
Gram matrices on strongly graded knots
======================================

The inverse of the B-spline Gram matrix stays bounded in the max-norm no
matter how the knots are placed, and its entries decay geometrically away
from the diagonal.  This script measures both on random partitions.
"""

import numpy as np

from splinelab import ClassicalBasis, demko_fit, gram_matrix, invert, knot_sequence, random_partition
from splinelab import uniform_partition

# a k=2 Gram matrix on uniform knots: interior rows are (1/6, 2/3, 1/6)
g = gram_matrix(ClassicalBasis(knot_sequence(uniform_partition(6), 2)))
print(np.round(g.to_dense(), 4))
print("row sums:", g.row_sums())

# worst inverse norm over many graded partitions, for growing n
print("\n k    n   max ||G^-1||   max q")
for k in (1, 2, 3, 4):
    for n in (20, 80, 200):
        worst, worst_q = 0.0, 0.0
        for seed in range(40):
            part = random_partition(n, seed, grading=1e3)
            g = gram_matrix(ClassicalBasis(knot_sequence(part, k)))
            inv = invert(g)
            fit = demko_fit(inv.matrix, offset=g.bandwidth)
            worst = max(worst, inv.inf_norm)
            worst_q = max(worst_q, fit.q)
        print(f"{k:2d} {n:4d}   {worst:12.4f}   {worst_q:.3f}")

# for uniform k=2 the decay rate is 2 - sqrt(3)
g = gram_matrix(ClassicalBasis(knot_sequence(uniform_partition(200), 2)))
fit = demko_fit(invert(g).matrix, offset=g.bandwidth)
print(f"\nuniform k=2: q = {fit.q:.4f}, 2 - sqrt(3) = {2 - np.sqrt(3):.4f}, c = {fit.c:.3f}")
