"""Gram matrices of spline bases, banded storage, inverses and decay envelopes."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import solve_banded

from .bspline import SplineBasis
from .partition import LEBESGUE, Measure
from .quadrature import composite_rule, panel_edges

__all__ = [
    "BandedMatrix",
    "DecayFit",
    "InverseResult",
    "NeumannReport",
    "quadrature_nodes",
    "mass_matrix",
    "gram_matrix",
    "inf_norm",
    "invert",
    "demko_fit",
    "neumann_check",
]


class BandedMatrix:
    """Square matrix stored in LAPACK diagonal-ordered form.

    ``ab[upper + i - j, j] == A[i, j]`` for ``-lower <= j - i <= upper``.
    """

    def __init__(self, ab: np.ndarray, lower: int, upper: int):
        ab = np.asarray(ab, dtype=float)
        if ab.shape[0] != lower + upper + 1:
            raise ValueError("storage height must be lower + upper + 1")
        self.ab = ab
        self.lower = int(lower)
        self.upper = int(upper)
        self.m = ab.shape[1]

    @classmethod
    def from_dense(cls, a, tol: float = 0.0) -> "BandedMatrix":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("banded storage needs a square matrix")
        m = a.shape[0]
        i, j = np.nonzero(np.abs(a) > tol)
        lower = int(max(0, np.max(i - j))) if i.size else 0
        upper = int(max(0, np.max(j - i))) if i.size else 0
        ab = np.zeros((lower + upper + 1, m))
        for d in range(-lower, upper + 1):
            diag = np.diagonal(a, d)
            if d >= 0:
                ab[upper - d, d:] = diag
            else:
                ab[upper - d, : m + d] = diag
        return cls(ab, lower, upper)

    @property
    def bandwidth(self) -> int:
        """Largest ``|i - j|`` with a stored entry."""
        return max(self.lower, self.upper)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.m)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.m, self.m))
        for d in range(-self.lower, self.upper + 1):
            row = self.ab[self.upper - d]
            idx = np.arange(max(0, -d), min(self.m, self.m - d))
            a[idx, idx + d] = row[idx + d]
        return a

    def __array__(self, dtype=None, copy=None):
        a = self.to_dense()
        return a if dtype is None else a.astype(dtype)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        a = self.to_dense()
        return bool(np.max(np.abs(a - a.T), initial=0.0) <= tol)

    def row_sums(self) -> np.ndarray:
        return self.to_dense().sum(axis=1)

    def inf_norm(self) -> float:
        return float(np.max(np.abs(self.to_dense()).sum(axis=1), initial=0.0))

    def __matmul__(self, other):
        return self.to_dense() @ np.asarray(other)

    def __sub__(self, other):
        return self.to_dense() - np.asarray(other)

    def to_csv(self, path) -> None:
        np.savetxt(Path(path), self.to_dense(), delimiter=",", fmt="%.17g")

    def __repr__(self):
        return f"BandedMatrix(m={self.m}, lower={self.lower}, upper={self.upper})"


def _needs_panels(bases, mu: Measure) -> bool:
    return (not mu.is_lebesgue) or any(b.kind != "classical" for b in bases)


def quadrature_nodes(bases, mu: Measure = LEBESGUE, points: int = 10,
                     max_panel: float | None = None, extra=()):
    """Flattened composite nodes and μ-weights over the union of breakpoints."""
    breaks = set(mu.breakpoints) | set(extra)
    for b in bases:
        breaks.update(b.breakpoints.tolist())
    if max_panel is None and _needs_panels(bases, mu):
        max_panel = 1.0 / 16
    edges = panel_edges(0.0, 1.0, sorted(breaks), max_panel)
    x, w = composite_rule(edges, points)
    x = x.reshape(-1)
    w = w.reshape(-1) * mu.density_values(x.reshape(-1))
    return x, w


def mass_matrix(rows: SplineBasis, mu: Measure = LEBESGUE, cols: SplineBasis | None = None,
                points: int = 10, max_panel: float | None = None) -> np.ndarray:
    """Dense ``(<M_i^rows, M_j^cols>_mu)``."""
    cols = rows if cols is None else cols
    x, w = quadrature_nodes((rows, cols), mu, points, max_panel)
    a = rows.eval_M(x)
    b = a if cols is rows else cols.eval_M(x)
    return (a * w[:, None]).T @ b


def gram_matrix(rows: SplineBasis, mu: Measure = LEBESGUE, cols: SplineBasis | None = None,
                points: int = 10, max_panel: float | None = None) -> BandedMatrix:
    """``G = (<M_i, N_j>_mu)`` with ``N_j = (mu(supp_F M_j)/k) M_j``.

    Under Lebesgue measure and classical B-splines this is the classical Gram
    matrix; with a perturbed basis and a density it is ``G_p``.
    """
    cols = rows if cols is None else cols
    if rows.count != cols.count:
        raise ValueError("row and column bases must have the same size")
    mass = mass_matrix(rows, mu, cols, points, max_panel)
    g = mass * cols.n_scales(mu)[None, :]
    # entries of disjoint supports are exact zeros; drop quadrature dust
    overlap = _support_overlap(rows, cols)
    g[~overlap] = 0.0
    return BandedMatrix.from_dense(g)


def _support_overlap(rows: SplineBasis, cols: SplineBasis) -> np.ndarray:
    a, b = rows.F_supports[:, 0][:, None], rows.F_supports[:, 1][:, None]
    c, d = cols.F_supports[:, 0][None, :], cols.F_supports[:, 1][None, :]
    return np.minimum(b, d) > np.maximum(a, c)


def inf_norm(a) -> float:
    """Maximum absolute row sum."""
    if isinstance(a, BandedMatrix):
        return a.inf_norm()
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a).sum(axis=1)))


@dataclass
class InverseResult:
    matrix: np.ndarray
    inf_norm: float
    residual: float


def invert(a, tol: float = 1e-10) -> InverseResult:
    """Dense inverse by banded LU and back-substitution on unit vectors.

    Raises ``LinAlgError`` if ``||A A^{-1} - I||_inf`` exceeds ``tol``.
    """
    if not isinstance(a, BandedMatrix):
        a = BandedMatrix.from_dense(a)
    eye = np.eye(a.m)
    try:
        inv = solve_banded((a.lower, a.upper), a.ab, eye)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise np.linalg.LinAlgError(f"matrix is singular: {exc}") from exc
    residual = inf_norm(a.to_dense() @ inv - eye)
    if not residual <= tol:
        raise np.linalg.LinAlgError(f"inverse residual {residual:.3g} exceeds {tol:g}")
    return InverseResult(inv, inf_norm(inv), residual)


@dataclass
class DecayFit:
    """Certified envelope ``|a_ij| <= c q^|i-j| + max_violation``."""

    c: float
    q: float
    max_violation: float
    ok: bool = True


def demko_fit(inv, noise: float = 1e-13, q_floor: float = 1e-3, offset: int = 0) -> DecayFit:
    """Geometric decay envelope of a (dense) inverse from per-diagonal maxima.

    Parameters
    ----------
    inv : array_like
        Square matrix, typically ``G^{-1}``.
    noise : float
        Diagonals whose maximum stays below ``noise * max|a_ii|`` do not
        enter the rate estimate; afterwards ``q`` is lifted (if needed) so
        that those small entries also fit under the envelope.
    q_floor : float
        Smallest reported ``q`` (used when there is no off-diagonal mass).
    offset : int
        Band offset ``s``.  The rate is
        ``q = max_{d > s} (top_d / max_{e <= s} top_e)^{1/(d - s)}`` where
        ``top_d`` is the largest modulus on the diagonals ``|i - j| = d``.
        With ``s = 0`` this is the ratio against the main diagonal; passing
        the bandwidth of the original matrix measures distance from the band
        edge, which skips the boundary transient inside the band.

    Returns
    -------
    DecayFit
        ``c`` is inflated until ``c q^|i-j|`` covers every entry, so the
        envelope is certified.  ``ok`` is False when ``q >= 1``.
    """
    a = np.abs(np.asarray(inv, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("decay fit needs a square matrix")
    m = a.shape[0]
    peak = float(np.max(np.diagonal(a)))
    if peak == 0:
        raise ValueError("zero diagonal: nothing to fit")
    floor = noise * peak
    top = np.array([max(np.max(np.diagonal(a, d)), np.max(np.diagonal(a, -d)))
                    for d in range(m)])
    s = min(max(int(offset), 0), m - 1)
    ref = float(np.max(top[: s + 1]))
    q = 0.0
    for d in range(s + 1, m):
        if top[d] > floor:
            q = max(q, (top[d] / ref) ** (1.0 / (d - s)))
    q = max(q, q_floor)
    dist = np.abs(np.subtract.outer(np.arange(m), np.arange(m)))
    big = a > floor
    if q < 1.0:
        # c covering the resolved entries, then lift q just enough that the
        # small far-off-diagonal tail sits under the same envelope
        c0 = float(np.max(a[big] / q ** dist[big]))
        tail = (a > 0) & (dist > 0) & ~big
        if np.any(tail):
            q = max(q, float(np.max((a[tail] / c0) ** (1.0 / dist[tail]))))
    if not q < 1.0:
        return DecayFit(peak, float(q), float("nan"), ok=False)
    logq = np.log(q)
    nz = a > 0
    # a few ulps of headroom so exp/log rounding cannot poke through
    c = float(np.max(np.exp(np.log(a[nz]) - dist[nz] * logq))) * (1.0 + 1e-13)
    with np.errstate(under="ignore"):
        env = c * np.exp(dist * logq)
    violation = float(np.max(np.maximum(a - env, 0.0)))
    return DecayFit(c, float(q), violation, ok=True)


@dataclass
class NeumannReport:
    diff_norm: float
    x_norm: float
    contraction: bool
    g_inv_norm: float
    gp_inv_norm: float
    inverse_bound_holds: bool | None


def neumann_check(g, gp) -> NeumannReport:
    """Norms of ``G_p - G`` and ``X = -G^{-1}(G_p - G)``.

    When ``||X||_inf <= 1/2`` the report also records whether
    ``||G_p^{-1}||_inf <= 2 ||G^{-1}||_inf``.
    """
    g_d = np.asarray(g, dtype=float)
    gp_d = np.asarray(gp, dtype=float)
    if g_d.shape != gp_d.shape:
        raise ValueError("G and G_p must have the same dimension")
    diff = gp_d - g_d
    g_inv = invert(g_d)
    x = -g_inv.matrix @ diff
    x_norm = inf_norm(x)
    gp_inv = invert(gp_d)
    contraction = x_norm <= 0.5
    holds = gp_inv.inf_norm <= 2.0 * g_inv.inf_norm if contraction else None
    return NeumannReport(inf_norm(diff), x_norm, contraction, g_inv.inf_norm,
                         gp_inv.inf_norm, holds)
