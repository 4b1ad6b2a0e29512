"""Orthogonal projection onto spline spaces in L2(mu).

With ``G = (<M_i, N_j>_mu)`` and ``(a_ij) = G^{-1}`` the projector is

    P f = sum_{i,j} a_ij <f, M_j>_mu N_i,

and ``N_i^* = sum_j a_ij M_j = sum_j b_ij N_j`` with ``b_ij = a_ij / a_j`` is the
dual basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .bspline import SplineBasis
from .gram import (
    demko_fit,
    gram_matrix,
    invert,
    mass_matrix,
    quadrature_nodes,
)
from .partition import LEBESGUE, IntervalPartition, Measure
from .quadrature import PiecewiseFunction, composite_rule, panel_edges

__all__ = [
    "Projector",
    "Projection",
    "NormEstimate",
    "DualBasis",
    "DifferenceReport",
    "project",
    "operator_inf_norm",
    "projector_difference",
    "dual_basis",
    "lobatto_samples",
    "common_atoms",
]


@dataclass
class Projection:
    coef: np.ndarray
    function: PiecewiseFunction

    def __call__(self, x):
        return self.function(x)


class Projector:
    """``P_{F,mu}`` for a basis on the partition ``F`` and a measure ``mu``."""

    def __init__(self, basis: SplineBasis, mu: Measure = LEBESGUE, points: int = 10,
                 max_panel: float | None = None):
        self.basis = basis
        self.mu = mu
        self.points = points
        self.max_panel = max_panel
        self.scales = basis.n_scales(mu)
        self.gram = gram_matrix(basis, mu, points=points, max_panel=max_panel)
        inv = invert(self.gram)
        self.gram_inverse = inv.matrix
        self.inverse_norm = inv.inf_norm
        self.b = self.gram_inverse / self.scales[None, :]

    @property
    def count(self) -> int:
        return self.basis.count

    @property
    def partition(self) -> IntervalPartition:
        return self.basis.partition

    def moments(self, f) -> np.ndarray:
        """``(<f, M_j>_mu)_j``."""
        f = PiecewiseFunction.wrap(f)
        x, w = quadrature_nodes((self.basis,), self.mu, self.points, self._panel(),
                                extra=f.breakpoints)
        return self.basis.eval_M(x).T @ (w * f(x))

    def _panel(self):
        if self.max_panel is not None:
            return self.max_panel
        return None if (self.mu.is_lebesgue and self.basis.kind == "classical") else 1.0 / 16

    def coefficients(self, f) -> np.ndarray:
        return self.gram_inverse @ self.moments(f)

    def __call__(self, f) -> Projection:
        return project(self, f)

    def symmetry_defect(self) -> float:
        """``max |b_ij - b_ji|``."""
        return float(np.max(np.abs(self.b - self.b.T), initial=0.0))


def project(P: Projector, f) -> Projection:
    """Coefficients ``c_i = sum_j a_ij <f, M_j>_mu`` and ``t -> sum_i c_i N_i(t)``."""
    coef = P.coefficients(f)
    return Projection(coef, P.basis.combination(coef, P.mu))


def lobatto_samples(partition: IntervalPartition, samples_per_atom: int) -> np.ndarray:
    """Sorted sample points: on every atom the union of the Chebyshev-Lobatto
    sets of sizes ``4..samples_per_atom``.

    The sets are nested in ``samples_per_atom``, so any maximum taken over them
    is nondecreasing in it.
    """
    if samples_per_atom < 4:
        raise ValueError("samples_per_atom must be at least 4")
    ref = np.unique(np.concatenate([
        0.5 - 0.5 * np.cos(np.pi * np.arange(m) / (m - 1)) for m in range(4, samples_per_atom + 1)
    ]))
    bp = partition.breakpoints
    t = (bp[:-1, None] + np.diff(bp)[:, None] * ref[None, :]).reshape(-1)
    return np.unique(np.clip(t, 0.0, 1.0))


@dataclass
class NormEstimate:
    """Sampled lower estimate of ``||P||_{L_inf -> L_inf}``."""

    value: float
    samples_per_atom: int
    n_samples: int
    argmax: float


def _s_rule(P: Projector, sub: int, points: int):
    bp = P.basis.breakpoints
    edges = np.unique(np.concatenate([
        np.linspace(a, b, sub + 1) for a, b in zip(bp[:-1], bp[1:])
    ] + [np.asarray(P.mu.breakpoints, dtype=float)]))
    edges = panel_edges(0.0, 1.0, edges, 1.0 / 64)
    x, w = composite_rule(edges, points)
    x = x.reshape(-1)
    return x, w.reshape(-1) * P.mu.density_values(x)


def operator_inf_norm(P: Projector, samples_per_atom: int = 8, sub_panels: int = 4,
                      points: int = 10, chunk: int = 512) -> NormEstimate:
    """``max_t int |K(t, s)| dmu(s)`` over per-atom Chebyshev-Lobatto samples.

    ``K(t, s) = sum_i N_i(t) N_i^*(s)`` is, for fixed ``t``, a spline in ``s``;
    its modulus is integrated with ``points``-point Gauss rules on every atom
    split into ``sub_panels`` pieces.
    """
    t = lobatto_samples(P.partition, samples_per_atom)
    s, w = _s_rule(P, sub_panels, points)
    m_s = sparse.csr_matrix(P.basis.eval_M(s))
    best, arg = -np.inf, 0.0
    for lo in range(0, len(t), chunk):
        tt = t[lo : lo + chunk]
        v = P.basis.eval_N(tt, P.mu) @ P.gram_inverse
        kern = np.asarray(m_s @ v.T)
        vals = w @ np.abs(kern)
        j = int(np.argmax(vals))
        if vals[j] > best:
            best, arg = float(vals[j]), float(tt[j])
    return NormEstimate(best, samples_per_atom, len(t), arg)


def common_atoms(fine: IntervalPartition, coarse: IntervalPartition) -> list[tuple[float, float]]:
    """Atoms of ``coarse`` that are not split in ``fine`` (the set ``U``)."""
    fset = set(fine.atoms)
    return [a for a in coarse.atoms if a in fset]


@dataclass
class DifferenceReport:
    sup_diff: float
    d: np.ndarray
    in_common: np.ndarray
    expansion_max: float
    expansion_check: bool


def projector_difference(PF: Projector, PG: Projector, f, samples_per_atom: int = 8,
                         tol: float = 1e-8) -> DifferenceReport:
    """Compare ``P_F f`` with ``P_G f`` for a refinement ``F`` of ``G``.

    ``d_i = <(P_F - P_G) f, N_i^F>_mu`` is computed from the mass matrices of
    both projections; it must vanish for every ``i`` whose F-support lies in
    the union ``U`` of atoms shared by ``F`` and ``G``.
    """
    fine, coarse = PF.partition, PG.partition
    if not fine.refines(coarse):
        raise ValueError("the partition of PG must be a coarsening of that of PF")
    if PF.mu.to_dict() != PG.mu.to_dict():
        raise ValueError("both projectors must use the same measure")
    f = PiecewiseFunction.wrap(f)
    pf, pg = project(PF, f), project(PG, f)

    scale_f = PF.scales
    cross = mass_matrix(PF.basis, PF.mu, PG.basis, PF.points, 1.0 / 16)
    own = mass_matrix(PF.basis, PF.mu, None, PF.points, PF._panel())
    # <P_F f, N_i^F> - <P_G f, N_i^F>
    d = scale_f * (own @ (scale_f * pf.coef) - cross @ (PG.scales * pg.coef))

    shared = common_atoms(fine, coarse)
    starts = np.array([a for a, _ in shared])
    ends = np.array([b for _, b in shared])
    inside = np.zeros(PF.count, dtype=bool)
    bp = fine.breakpoints
    for i, (lo, hi) in enumerate(PF.basis.F_supports):
        atoms = [(a, b) for a, b in zip(bp[:-1], bp[1:]) if a >= lo and b <= hi]
        inside[i] = bool(atoms) and all(
            np.any((starts == a) & (ends == b)) for a, b in atoms
        )
    emax = float(np.max(np.abs(d[inside]), initial=0.0))
    t = lobatto_samples(fine, samples_per_atom)
    sup = float(np.max(np.abs(pf(t) - pg(t))))
    return DifferenceReport(sup, d, inside, emax, emax <= tol)


class DualBasis:
    """``N_i^* = sum_j a_ij M_j`` for a projector."""

    def __init__(self, P: Projector):
        self.projector = P
        self.coef = P.gram_inverse
        self.b = P.b

    def __call__(self, t) -> np.ndarray:
        """``(len(t), count)`` array of dual function values."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.projector.basis.eval_M(t) @ self.coef.T

    def biorthogonality(self) -> np.ndarray:
        """``(<N_i^*, N_j>_mu)`` by quadrature of the evaluated functions."""
        P = self.projector
        x, w = quadrature_nodes((P.basis,), P.mu, P.points, P._panel())
        return (self(x) * w[:, None]).T @ P.basis.eval_N(x, P.mu)

    def first_index(self, t) -> np.ndarray:
        """Smallest ``j`` with ``t`` in the F-support of ``N_j``."""
        sup = self.projector.basis.F_supports
        t = np.atleast_1d(np.asarray(t, dtype=float))
        hit = (t[:, None] >= sup[None, :, 0]) & (t[:, None] <= sup[None, :, 1])
        return np.argmax(hit, axis=1)

    def decay_constant(self, t, q: float | None = None) -> tuple[float, float]:
        """Smallest ``c1`` with ``|N_i^*(t)| <= c1 q^|i - j(t)| / mu(supp_F N_i)``
        on the samples ``t``; ``q`` defaults to the decay fit of ``G^{-1}``.

        Returns ``(c1, q)``.
        """
        P = self.projector
        if q is None:
            q = demko_fit(P.gram_inverse, offset=P.gram.bandwidth).q
        t = np.atleast_1d(np.asarray(t, dtype=float))
        vals = np.abs(self(t))
        dist = np.abs(np.arange(P.count)[None, :] - self.first_index(t)[:, None])
        mass = P.basis.support_masses(P.mu)
        with np.errstate(over="ignore"):
            ratio = vals * mass[None, :] / np.power(q, dist)
        return float(np.max(ratio)), float(q)


def dual_basis(P: Projector) -> DualBasis:
    return DualBasis(P)
