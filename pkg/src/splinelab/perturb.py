"""Perturbation and compatibility checks for spline-like families.

Two families are provided: B-splines rescaled by a density at the centre of
their support, and Chebyshevian B-splines built from a weight system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bspline import ClassicalBasis, ScaledBasis, SplineBasis
from .chebyshev import ChebyshevBasis
from .gram import mass_matrix, quadrature_nodes
from .partition import (
    LEBESGUE,
    IntervalPartition,
    Measure,
    knot_sequence,
    mesh_norm,
    trace_coincides,
)
from .projector import lobatto_samples
from .weights import WeightSystem

__all__ = [
    "PerturbationReport",
    "CompatibilityReport",
    "weighted_perturbed_basis",
    "check_conditions",
    "band_constant",
    "check_compatibility",
    "family_basis",
]


def weighted_perturbed_basis(classical: SplineBasis, mu: Measure) -> ScaledBasis:
    """``M_i^p = M_i / w(c_i)`` with ``c_i`` the centre of ``supp M_i``.

    ``w`` is the density of ``mu`` as stored (normalised unless the measure
    was built with ``normalize=False``).
    """
    centres = classical.supports.mean(axis=1)
    w = mu.density_values(centres)
    if np.any(w <= 0):
        raise ValueError("density must be positive at the support centres")
    return ScaledBasis(classical, 1.0 / w)


@dataclass
class PerturbationReport:
    theta_proxy: float
    band_C: int
    norm_C: float
    mesh: float

    def to_dict(self) -> dict:
        return {"theta_proxy": self.theta_proxy, "band_C": self.band_C,
                "norm_C": self.norm_C, "mesh": self.mesh}


def band_constant(basis: SplineBasis) -> int:
    """Smallest ``C`` such that F-supports of ``i`` and ``j`` are disjoint
    whenever ``|i - j| >= C``."""
    sup = basis.F_supports
    lo = np.maximum(sup[:, None, 0], sup[None, :, 0])
    hi = np.minimum(sup[:, None, 1], sup[None, :, 1])
    i, j = np.nonzero(hi > lo)
    return int(np.max(np.abs(i - j))) + 1


def check_conditions(classical: SplineBasis, perturbed: SplineBasis, mu: Measure = LEBESGUE,
                     samples_per_atom: int = 16) -> PerturbationReport:
    """Measured quantities of the three perturbation conditions.

    ``theta_proxy = max_ij |mu(supp_F M_j^p) <M_i^p, M_j^p>_mu - |supp_F M_j| <M_i, M_j>|``;
    ``band_C`` from :func:`band_constant`;
    ``norm_C = max_i ||M_i^p||_inf * mu(supp_F M_i^p)`` sampled per atom.
    """
    if classical.count != perturbed.count:
        raise ValueError("bases must have the same number of functions")
    mp = mass_matrix(perturbed, mu)
    mc = mass_matrix(classical, LEBESGUE)
    lhs = mp * perturbed.support_masses(mu)[None, :]
    rhs = mc * classical.support_lengths[None, :]
    theta = float(np.max(np.abs(lhs - rhs)))
    t = lobatto_samples(perturbed.partition, samples_per_atom)
    sup = np.max(np.abs(perturbed.eval_M(t)), axis=0)
    norm_c = float(np.max(sup * perturbed.support_masses(mu)))
    return PerturbationReport(theta, band_constant(perturbed), norm_c,
                              mesh_norm(perturbed.partition, mu))


def family_basis(partition: IntervalPartition, k: int, family: str = "classical",
                 ws: WeightSystem | None = None, mu: Measure = LEBESGUE) -> SplineBasis:
    """Basis of the named family on ``partition``."""
    knots = knot_sequence(partition, k)
    if family == "classical":
        return ClassicalBasis(knots)
    if family == "weighted":
        return weighted_perturbed_basis(ClassicalBasis(knots), mu)
    if family == "chebyshev":
        if ws is None:
            raise ValueError("the chebyshev family needs a weight system")
        return ChebyshevBasis(knots, ws)
    raise KeyError(f"unknown family {family!r}")


@dataclass
class CompatibilityReport:
    nested: bool
    local: bool
    nested_residual: float
    local_residual: float
    local_count: int


def _relative_residuals(target: SplineBasis, space: SplineBasis, mu: Measure,
                        which: np.ndarray) -> np.ndarray:
    """Relative L2(mu) distance of ``target`` functions from span(``space``)."""
    if not np.any(which):
        return np.zeros(0)
    x, w = quadrature_nodes((target, space), mu, max_panel=1.0 / 32)
    a = space.eval_M(x)
    b = target.eval_M(x)[:, which]
    sw = np.sqrt(w)[:, None]
    # weighted least squares on the quadrature nodes equals the L2(mu) projection
    coef, *_ = np.linalg.lstsq(a * sw, b * sw, rcond=None)
    r = (b - a @ coef) * sw
    return np.sqrt((r**2).sum(axis=0)) / np.sqrt(((b * sw) ** 2).sum(axis=0))


def check_compatibility(coarse: IntervalPartition, fine: IntervalPartition, k: int,
                        family: str = "classical", ws: WeightSystem | None = None,
                        region: tuple[float, float] = (0.0, 1.0), mu: Measure = LEBESGUE,
                        tol: float = 1e-8) -> CompatibilityReport:
    """Nestedness and local structure for ``coarse`` contained in ``fine``.

    ``nested``: every coarse basis function lies in the fine space.
    ``local``: every fine basis function whose F-support lies in ``region``
    lies in the coarse space.  Membership is tested by relative least-squares
    residual in L2(mu).  ``region`` must be an interval on which both
    partitions have the same breakpoints.
    """
    if not fine.refines(coarse):
        raise ValueError("fine partition does not refine the coarse one")
    lo, hi = region
    if not trace_coincides(fine, coarse, lo, hi):
        raise ValueError("partitions differ inside the region")
    bc = family_basis(coarse, k, family, ws, mu)
    bf = family_basis(fine, k, family, ws, mu)
    up = _relative_residuals(bc, bf, mu, np.ones(bc.count, dtype=bool))
    sup = bf.F_supports
    inside = (sup[:, 0] >= lo) & (sup[:, 1] <= hi)
    down = _relative_residuals(bf, bc, mu, inside)
    nres = float(np.max(up, initial=0.0))
    lres = float(np.max(down, initial=0.0))
    return CompatibilityReport(nres <= tol, lres <= tol, nres, lres, int(inside.sum()))
