"""Spline bases on arbitrary knots, their Gram matrices and orthoprojectors."""

from .bspline import ClassicalBasis, ScaledBasis, SplineBasis, build_classical_basis
from .chebyshev import ChebyshevBasis, build_chebyshev_basis, compare_to_classical
from .gram import BandedMatrix, demko_fit, gram_matrix, inf_norm, invert, neumann_check
from .partition import (
    LEBESGUE,
    IntervalPartition,
    KnotSequence,
    Measure,
    knot_sequence,
    mesh_norm,
    random_partition,
    refine_to_mesh,
    uniform_partition,
)
from .perturb import check_compatibility, check_conditions, weighted_perturbed_basis
from .projector import Projector, dual_basis, operator_inf_norm, project, projector_difference
from .quadrature import PiecewiseFunction, gauss_legendre, inner_product, integrate
from .weights import WeightFunction, WeightSystem, weight_family

__version__ = "0.1.0"
