"""Chebyshevian B-splines generated by a weight system.

``M_i^w(x)`` is the ratio of two confluent determinants over the knots
``t_i..t_{i+k}``: the denominator uses the dual system ``u*_1..u*_{k+1}``,
the numerator replaces the last column by ``g_k(x, .)``.

Determinants are formed with the iterated integrals started at the left end
of each support instead of at 0.  Both systems span the same nested spaces
through a unit-triangular change of columns, so the determinants agree, but
the local start keeps every entry at its natural scale on short supports.
Derivatives at repeated knots follow the chains ``D u*_{j,i} = w_{k-j}
u*_{j+1,i-1}`` and ``d/dy g_j = -w_j g_{j-1}`` with exact weight derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bspline import ClassicalBasis, SplineBasis, _check_points
from .partition import KnotSequence
from .quadrature import IteratedIntegrals, chain_jets
from .weights import WeightSystem

__all__ = [
    "ConfluentPointSet",
    "confluent_determinant",
    "ChebyshevBasis",
    "build_chebyshev_basis",
    "ChebyshevComparison",
    "compare_to_classical",
    "ProofQuantities",
    "proof_quantities",
    "polynomial_denominator",
    "vandermonde_constant",
]


class ConfluentPointSet:
    """Nondecreasing points with confluence orders ``d_i``.

    ``d_i`` counts how many immediately preceding points equal ``s_i``; a
    row at a repeated point uses the ``d_i``-th derivative.
    """

    def __init__(self, points: Sequence[float]):
        s = np.asarray(points, dtype=float).reshape(-1)
        if np.any(np.diff(s) < 0):
            raise ValueError("points must be nondecreasing")
        d = np.zeros(len(s), dtype=int)
        for i in range(1, len(s)):
            d[i] = d[i - 1] + 1 if s[i] == s[i - 1] else 0
        self.points = s
        self.orders = d

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(zip(self.points.tolist(), self.orders.tolist()))


def confluent_determinant(pts, columns: Sequence) -> float:
    """``det(D^{d_i} u_j(s_i))`` for confluent points ``pts``.

    Each column is a callable ``u(s, d)`` returning the ``d``-th derivative,
    or a pair ``(u, max_order)`` declaring the highest derivative available.
    """
    if not isinstance(pts, ConfluentPointSet):
        pts = ConfluentPointSet(pts)
    if len(pts) != len(columns):
        raise ValueError(f"{len(pts)} points but {len(columns)} columns")
    need = int(pts.orders.max()) if len(pts) else 0
    fns = []
    for col in columns:
        if isinstance(col, tuple):
            fn, top = col
            if top < need:
                raise ValueError(f"column offers derivatives up to {top}, need {need}")
            fns.append(fn)
        else:
            fns.append(col)
    mat = np.array([[fn(s, d) for fn in fns] for s, d in pts], dtype=float)
    return float(np.linalg.det(mat))


class ChebyshevBasis(SplineBasis):
    """Chebyshevian B-splines ``M_i^w`` on a knot sequence.

    Per-index denominators and last-column cofactors are cached; the
    numerator is their inner product with the ``g_k(x, .)`` column.
    """

    kind = "chebyshev"

    def __init__(self, knots: KnotSequence, ws: WeightSystem, points: int = 16,
                 max_panel: float = 0.125):
        if knots.order != ws.order:
            raise ValueError(f"knot order {knots.order} != weight order {ws.order}")
        super().__init__(knots)
        self.ws = ws
        self.points = points
        self.max_panel = max_panel
        self._bp = knots.breakpoints
        k = self.order
        # step m of both derivative chains multiplies by w_{k-m}
        self._chain_desc = [ws.w(k - m) for m in range(k)]
        self._chain_asc = [ws.w(j) for j in range(2, k + 1)]
        self._u_cache: dict[int, IteratedIntegrals] = {}
        self._a_cache: dict[int, IteratedIntegrals] = {}
        self._jet_cache: dict[int, list] = {}
        self._local: dict[int, tuple] = {}

    # -- cached building blocks, keyed by breakpoint index ------------------

    def _extent(self, p: int) -> float:
        return float(self._bp[min(p + self.order, len(self._bp) - 1)])

    def _u_chain(self, p: int) -> IteratedIntegrals:
        if p not in self._u_cache:
            self._u_cache[p] = IteratedIntegrals(
                self._chain_desc, self._bp[p], self._extent(p), breaks=self._bp,
                points=self.points, max_panel=self.max_panel)
        return self._u_cache[p]

    def _a_chain(self, p: int) -> IteratedIntegrals:
        if p not in self._a_cache:
            self._a_cache[p] = IteratedIntegrals(
                self._chain_asc, self._bp[p], self._extent(p), breaks=self._bp,
                points=self.points, max_panel=self.max_panel)
        return self._a_cache[p]

    def _jets(self, p: int) -> list:
        if p not in self._jet_cache:
            k = self.order
            y = float(self._bp[p])
            jets = [w.jet(y, k) for w in self._chain_desc]
            self._jet_cache[p] = chain_jets(jets, k - 1)
        return self._jet_cache[p]

    def _bp_index(self, y: float) -> int:
        return int(np.searchsorted(self._bp, y))

    def local_system(self, i: int):
        """``(rows, matrix, det, cofactors)`` for index ``i``.

        ``rows`` lists ``(knot, confluence order, breakpoint index)``.
        ``matrix`` is the denominator matrix; ``cofactors`` expand the
        numerator along its last column.
        """
        if i in self._local:
            return self._local[i]
        if not 0 <= i < self.count:
            raise IndexError(f"basis index {i} outside 0..{self.count - 1}")
        k = self.order
        tau = ConfluentPointSet(self.knots.knots[i : i + k + 1])
        base = self._bp_index(tau.points[0])
        uchain = self._u_chain(base)
        rows = []
        mat = np.zeros((k + 1, k + 1))
        for r, (y, d) in enumerate(tau):
            p = self._bp_index(y)
            rows.append((y, d, p))
            jet = self._jets(p)[d]
            for c in range(1, k + 2):
                total = 0.0
                for m in range(min(d, c - 1) + 1):
                    total += jet[m][0] * float(uchain(m, c - m, y))
                mat[r, c - 1] = total
        det = float(np.linalg.det(mat))
        if not det > 0:
            raise ValueError(
                f"denominator determinant {det:g} <= 0 for index {i}; "
                "weight system or quadrature is broken")
        fixed = mat[:, :k]
        cof = np.array([
            (-1) ** (r + k) * np.linalg.det(np.delete(fixed, r, axis=0))
            for r in range(k + 1)
        ])
        out = (rows, mat, det, cof)
        self._local[i] = out
        return out

    def denominator(self, i: int) -> float:
        return self.local_system(i)[2]

    def kernel_column(self, i: int, x) -> np.ndarray:
        """Rows ``D_y^{d_r} g_k(x, y)|_{y = t_r}`` for points ``x``; shape ``(k+1, len(x))``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        rows = self.local_system(i)[0]
        k = self.order
        w1 = self.ws.w(1)(x)
        col = np.zeros((k + 1, len(x)))
        for r, (y, d, p) in enumerate(rows):
            if y >= 1.0:
                continue  # g(x, 1) vanishes for x < 1 and by left-continuity at 1
            ind = x >= y
            if not np.any(ind):
                continue
            chain = self._a_chain(p)
            xs = np.clip(x[ind], y, chain.end)
            jet = self._jets(p)[d]
            vals = np.zeros(len(xs))
            for m in range(min(d, k - 1) + 1):
                j = k - m
                vals += (-1) ** m * jet[m][0] * chain(0, j, xs)
            col[r, ind] = vals * w1[ind]
        return col

    def numerator(self, i: int, x) -> np.ndarray:
        cof = self.local_system(i)[3]
        return cof @ self.kernel_column(i, x)

    def eval_index(self, i: int, x) -> np.ndarray:
        """``M_i^w`` at points ``x`` (zero outside the support)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        a, b = self.supports[i]
        inside = (x >= a) & ((x < b) | ((b == 1.0) & (x == 1.0)))
        out = np.zeros(len(x))
        if np.any(inside):
            det = self.denominator(i)
            out[inside] = (-1) ** self.order * self.numerator(i, x[inside]) / det
        return out

    def eval_M(self, x) -> np.ndarray:
        x = _check_points(x)
        out = np.zeros((len(x), self.count))
        for i in range(self.count):
            a, b = self.supports[i]
            sel = np.flatnonzero((x >= a) & (x <= b))
            if sel.size:
                out[sel, i] = self.eval_index(i, x[sel])
        return out


def build_chebyshev_basis(knots: KnotSequence, ws: WeightSystem, **kw) -> ChebyshevBasis:
    return ChebyshevBasis(knots, ws, **kw)


def polynomial_denominator(points: Sequence[float]) -> float:
    """``D(points; p*_1..p*_{m})`` with ``p*_j(t) = t^{j-1}/(j-1)!``."""
    pts = ConfluentPointSet(points)
    m = len(pts)

    def column(j):
        def col(s, d):
            if d > j:
                return 0.0
            return s ** (j - d) / math.factorial(j - d)
        return col

    return confluent_determinant(pts, [column(j) for j in range(m)])


def vandermonde_constant(k: int, points: Sequence[float] | None = None) -> float:
    """Measured ``c`` in ``D(t; p*_1..p*_{k+1}) = c * prod_{r<s} (t_s - t_r)``."""
    t = np.arange(k + 1, dtype=float) if points is None else np.asarray(points, float)
    if len(t) != k + 1 or len(np.unique(t)) != k + 1:
        raise ValueError("need k+1 distinct points")
    vdm = np.prod([t[s] - t[r] for r in range(k + 1) for s in range(r + 1, k + 1)])
    return polynomial_denominator(t) / vdm


@dataclass
class ChebyshevComparison:
    """Per-index comparison of ``M_i^w`` against ``M_i`` on a sampling grid."""

    sup_diff: np.ndarray
    supp_len: np.ndarray
    omega: np.ndarray
    bound_ratio: np.ndarray
    scaled_sup: np.ndarray

    @property
    def max_bound_ratio(self) -> float:
        return float(np.max(self.bound_ratio))


def compare_to_classical(cheb: SplineBasis, classical: SplineBasis, grid) -> ChebyshevComparison:
    """``sup|M_i^w - M_i|`` on ``grid`` and its scaling against the weights' moduli.

    ``bound_ratio_i = sup_diff_i * |supp M_i| / max_j omega(w_j, |supp M_i|)``
    and ``scaled_sup_i = sup|M_i^w| * |supp M_i|``.
    """
    if cheb.order != classical.order or not np.array_equal(cheb.knots.knots, classical.knots.knots):
        raise ValueError("bases must share knots and order")
    grid = _check_points(grid)
    mw = cheb.eval_M(grid)
    mc = classical.eval_M(grid)
    sup_diff = np.max(np.abs(mw - mc), axis=0)
    supp = cheb.support_lengths
    ws = getattr(cheb, "ws", None)
    omega = np.array([ws.max_omega(h) if ws is not None else 0.0 for h in supp])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(omega > 0, sup_diff * supp / np.where(omega > 0, omega, 1.0),
                         np.where(sup_diff > 1e-12, np.inf, 0.0))
    scaled = np.max(np.abs(mw), axis=0) * supp
    return ChebyshevComparison(sup_diff, supp.copy(), omega, ratio, scaled)


@dataclass
class ProofQuantities:
    """Determinants comparing ``M_i^w`` to the frozen-weight B-spline."""

    q: float
    eps: float
    r: np.ndarray
    delta: np.ndarray
    min_weights: np.ndarray


def proof_quantities(knots: KnotSequence, ws: WeightSystem, i: int, x,
                     basis: ChebyshevBasis | None = None) -> ProofQuantities:
    """``q_k, eps_k, r_k(x), delta_k(x)`` for index ``i``.

    The frozen system uses ``min`` of each ``w_j`` over ``[t_i, t_{i+k}]``
    (129-point sample).  ``(-1)^k r_k / q_k`` is the polynomial B-spline.
    """
    cheb = basis if basis is not None else ChebyshevBasis(knots, ws)
    a, b = cheb.supports[i]
    frozen_ws = ws.minimized(a, b)
    frozen = ChebyshevBasis(knots, frozen_ws, points=cheb.points, max_panel=cheb.max_panel)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    q = frozen.denominator(i)
    eps = cheb.denominator(i) - q
    r = frozen.numerator(i, x)
    delta = cheb.numerator(i, x) - r
    mins = np.array([w.params["c"] for w in frozen_ws.weights])
    return ProofQuantities(q, eps, r, delta, mins)


def classical_from_chebyshev(cheb: ChebyshevBasis) -> ClassicalBasis:
    return ClassicalBasis(cheb.knots)
