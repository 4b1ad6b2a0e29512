"""Composite Gauss-Legendre quadrature and iterated-integral tables.

Iterated integrals of weight chains are carried as piecewise Legendre
series: on every panel the integrand is interpolated at the Gauss nodes and
integrated exactly, and panel totals are accumulated left to right.  This is
the triangular first-order system ``D u_{j,i} = w_{k-j} u_{j+1,i-1}`` solved
panel by panel, and it can be evaluated anywhere, not only on a fixed grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre as L

__all__ = [
    "QuadratureRule",
    "gauss_legendre",
    "panel_edges",
    "composite_rule",
    "PiecewiseFunction",
    "integrate",
    "inner_product",
    "PanelSeries",
    "IteratedIntegrals",
    "chain_jets",
    "iterated_integral_table",
    "g_kernel",
]

DEFAULT_POINTS = 10


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on [-1, 1]; exact up to degree ``order``."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def points(self) -> int:
        return len(self.nodes)

    @property
    def order(self) -> int:
        return 2 * self.points - 1


@lru_cache(maxsize=None)
def gauss_legendre(points: int) -> QuadratureRule:
    if points < 1:
        raise ValueError("need at least one quadrature point")
    x, w = L.leggauss(points)
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(x, w)


def panel_edges(a: float, b: float, breaks: Sequence[float] = (),
                max_panel: float | None = None) -> np.ndarray:
    """Sorted panel boundaries on [a, b] honouring ``breaks`` inside (a, b)."""
    if a > b:
        raise ValueError(f"integration bounds reversed: a={a} > b={b}")
    br = np.asarray(breaks, dtype=float)
    br = br[(br > a) & (br < b)]
    edges = np.unique(np.concatenate(([a, b], br)))
    if max_panel is None or len(edges) < 2:
        return edges
    pieces = [edges[:1]]
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = max(1, math.ceil((hi - lo) / max_panel - 1e-12))
        pieces.append(np.linspace(lo, hi, m + 1)[1:])
    return np.concatenate(pieces)


def composite_rule(edges: np.ndarray, points: int = DEFAULT_POINTS):
    """Nodes and weights of the composite rule over consecutive ``edges``.

    Returns arrays of shape ``(panels, points)``.
    """
    rule = gauss_legendre(points)
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    x = lo + half * (rule.nodes[None, :] + 1.0)
    w = half * rule.weights[None, :]
    return x, w


@dataclass(frozen=True)
class PiecewiseFunction:
    """A vectorised evaluator plus the points where it may lose smoothness."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple[float, ...] = field(default=())

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=float))

    @classmethod
    def wrap(cls, f) -> "PiecewiseFunction":
        if isinstance(f, PiecewiseFunction):
            return f
        if np.isscalar(f):
            c = float(f)
            return cls(lambda x: np.full(np.shape(x), c))
        return cls(f)


def integrate(f, a: float, b: float, points_per_piece: int = DEFAULT_POINTS,
              max_panel: float | None = None) -> float:
    """Composite Gauss-Legendre integral of ``f`` over [a, b].

    The breakpoints of ``f`` inside [a, b] become panel boundaries, so the
    result is exact to roundoff for piecewise polynomials of degree
    ``<= 2 * points_per_piece - 1``.
    """
    f = PiecewiseFunction.wrap(f)
    if a > b:
        raise ValueError(f"integration bounds reversed: a={a} > b={b}")
    if a == b:
        return 0.0
    edges = panel_edges(a, b, f.breakpoints, max_panel)
    x, w = composite_rule(edges, points_per_piece)
    return float(np.sum(w * f(x)))


def inner_product(f, g, mu=None, points: int = DEFAULT_POINTS,
                  max_panel: float | None = None) -> float:
    """``<f, g>_mu`` on [0, 1]; ``mu=None`` means Lebesgue measure."""
    f = PiecewiseFunction.wrap(f)
    g = PiecewiseFunction.wrap(g)
    breaks = set(f.breakpoints) | set(g.breakpoints)
    if mu is not None:
        breaks |= set(mu.breakpoints)
        if max_panel is None and not mu.is_lebesgue:
            max_panel = 1.0 / 16
    edges = panel_edges(0.0, 1.0, sorted(breaks), max_panel)
    x, w = composite_rule(edges, points)
    dens = 1.0 if mu is None else mu.density_values(x)
    return float(np.sum(w * dens * f(x) * g(x)))


# ---------------------------------------------------------------------------
# piecewise Legendre series


@lru_cache(maxsize=None)
def _spectral_mats(points: int):
    rule = gauss_legendre(points)
    q = np.arange(points)
    vand = L.legvander(rule.nodes, points - 1)  # (Q, Q)
    # discrete Legendre transform: values at nodes -> interpolant coefficients
    fwd = ((2 * q + 1) / 2.0)[:, None] * (vand * rule.weights[:, None]).T
    # coefficients -> antiderivative coefficients (from -1), one extra degree
    anti = np.zeros((points, points + 1))
    for i in range(points):
        e = np.zeros(points)
        e[i] = 1.0
        anti[i] = L.legint(e, lbnd=-1)
    node_vand = L.legvander(rule.nodes, points)  # (Q, Q+1)
    for m in (fwd, anti, node_vand):
        m.setflags(write=False)
    return fwd, anti, node_vand


class PanelSeries:
    """Piecewise Legendre series on consecutive panels.

    ``coef[p]`` holds coefficients in the local variable of panel ``p``
    mapped to [-1, 1].  Evaluation is right-continuous at interior edges.
    """

    def __init__(self, edges: np.ndarray, coef: np.ndarray):
        self.edges = np.asarray(edges, dtype=float)
        self.coef = np.asarray(coef, dtype=float)

    @classmethod
    def constant(cls, edges, value: float, degree: int):
        coef = np.zeros((len(edges) - 1, degree + 1))
        coef[:, 0] = value
        return cls(edges, coef)

    def locate(self, x: np.ndarray):
        idx = np.searchsorted(self.edges, x, side="right") - 1
        idx = np.clip(idx, 0, len(self.edges) - 2)
        lo, hi = self.edges[idx], self.edges[idx + 1]
        xi = (2.0 * x - (lo + hi)) / (hi - lo)
        return idx, xi

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        idx, xi = self.locate(flat)
        vand = L.legvander(xi, self.coef.shape[1] - 1)
        out = np.einsum("nd,nd->n", vand, self.coef[idx])
        return out.reshape(x.shape)

    def node_values(self, points: int) -> np.ndarray:
        """Values at the Gauss nodes of every panel, shape ``(panels, points)``."""
        _, _, node_vand = _spectral_mats(points)
        deg = self.coef.shape[1]
        if deg <= node_vand.shape[1]:
            return self.coef @ node_vand[:, :deg].T
        rule = gauss_legendre(points)
        return self.coef @ L.legvander(rule.nodes, deg - 1).T

    @classmethod
    def antiderivative(cls, edges: np.ndarray, values: np.ndarray, points: int):
        """Running integral from ``edges[0]`` of an integrand given at Gauss nodes."""
        fwd, anti, _ = _spectral_mats(points)
        half = 0.5 * np.diff(edges)[:, None]
        coef = (values @ fwd.T) @ anti * half
        totals = coef.sum(axis=1)  # P_q(1) = 1
        offsets = np.concatenate(([0.0], np.cumsum(totals)[:-1]))
        coef[:, 0] += offsets
        return cls(edges, coef)


class IteratedIntegrals:
    """Nested integrals of a weight chain started at ``base``.

    With ``chain = (v_0, v_1, ..., v_{S-1})`` the table holds, for every
    level ``s`` and ``r >= 1``,

        T[s, 1] = 1,   T[s, r](x) = int_base^x v_s(t) T[s+1, r-1](t) dt,

    for ``r <= S - s + 1``.
    """

    def __init__(self, chain: Sequence, base: float, end: float,
                 breaks: Sequence[float] = (), points: int = 16,
                 max_panel: float | None = 0.125, edges: np.ndarray | None = None):
        self.chain = tuple(chain)
        self.base = float(base)
        self.end = float(end)
        self.points = points
        if edges is None:
            extra = list(breaks)
            for v in self.chain:
                extra.extend(v.breakpoints)
            edges = panel_edges(self.base, self.end, extra, max_panel)
        self.edges = np.asarray(edges, dtype=float)
        if len(self.edges) < 2 or self.edges[-1] <= self.edges[0]:
            raise ValueError("iterated integrals need a base strictly below the end")
        x, _ = composite_rule(self.edges, points)
        depth = len(self.chain)
        self.table: dict[tuple[int, int], PanelSeries] = {}
        one = PanelSeries.constant(self.edges, 1.0, points)
        for s in range(depth + 1):
            self.table[s, 1] = one
        wvals = [v(x) for v in self.chain]
        for r in range(2, depth + 2):
            for s in range(0, depth - r + 2):
                inner = self.table[s + 1, r - 1].node_values(points)
                self.table[s, r] = PanelSeries.antiderivative(
                    self.edges, wvals[s] * inner, points
                )

    @property
    def depth(self) -> int:
        return len(self.chain)

    def __call__(self, s: int, r: int, x):
        if r < 1 or (s, r) not in self.table:
            raise KeyError(f"no iterated integral at level {s}, index {r}")
        return self.table[s, r](x)


def _jet_derivative(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    out[:-1] = a[1:] * np.arange(1, len(a))
    return out


def _jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: len(a)]


def chain_jets(weight_jets: Sequence[np.ndarray], dmax: int) -> list[list[np.ndarray]]:
    """Coefficient jets for repeated differentiation along a weight chain.

    If ``D F_m = c_m F_{m+1}`` where ``c_m`` has Taylor jet ``weight_jets[m]``
    at a point ``s``, then ``D^d F_0 = sum_m J[d][m] F_m`` with ``J[d][m]``
    returned here as Taylor jets at ``s`` (``J[d][m][0]`` is the value).
    """
    length = dmax + 1
    e0 = np.zeros(length)
    e0[0] = 1.0
    out = [[e0]]
    for _ in range(dmax):
        prev = out[-1]
        new = [np.zeros(length) for _ in range(len(prev) + 1)]
        for m, c in enumerate(prev):
            new[m] += _jet_derivative(c)
            if m < len(weight_jets):
                new[m + 1] += _jet_mul(c, np.asarray(weight_jets[m])[:length])
        out.append(new)
    return out


def iterated_integral_table(ws, j: int, grid, panels: int = 512,
                            points: int = DEFAULT_POINTS) -> np.ndarray:
    """Values of ``u*_{j,i}`` for ``i = 1..k+1-j`` on ``grid``.

    Row ``i-1`` of the result holds ``u*_{j,i}``; the integrals start at 0
    and are accumulated over a master grid of ``panels`` Gauss panels.
    """
    k = ws.order
    if not 0 <= j <= k:
        raise ValueError(f"level j={j} outside 0..{k}")
    grid = np.asarray(grid, dtype=float)
    if grid.size and (grid.min() < 0 or grid.max() > 1):
        raise ValueError("grid must lie in [0, 1]")
    chain = [ws.w(k - j - m) for m in range(k - j)]
    it = IteratedIntegrals(chain, 0.0, 1.0, points=points, max_panel=1.0 / panels)
    return np.array([it(0, i, grid) for i in range(1, k + 2 - j)])


def g_kernel(ws, j: int, x: float, y: float, dy_order: int = 0) -> float:
    """``(d/dy)^dy_order g_j(x, y)`` for the truncated-power analogue ``g_j``.

    ``g_j(x, y) = 1[x >= y] h_j(x, y)``; y-derivatives follow
    ``d/dy g_j = -w_j(y) g_{j-1}`` for ``x != y``.
    """
    k = ws.order
    if not 1 <= j <= k:
        raise ValueError(f"kernel index j={j} outside 1..{k}")
    if not 0 <= dy_order <= j - 1:
        raise ValueError(f"derivative order {dy_order} needs j > {dy_order}, got j={j}")
    jets = [ws.w(j - m).jet(y, dy_order + 1) for m in range(j)]
    coef = chain_jets(jets, dy_order)[dy_order]
    total = 0.0
    for m in range(min(dy_order, j - 1) + 1):
        total += (-1) ** m * coef[m][0] * _g_value(ws, j - m, x, y)
    return total


def _g_value(ws, j: int, x: float, y: float) -> float:
    if x < y:
        return 0.0
    w1 = ws.w(1)(x)
    if j == 1:
        return w1
    if x == y:
        return 0.0
    chain = [ws.w(l) for l in range(2, j + 1)]
    it = IteratedIntegrals(chain, y, x, points=16, max_panel=1.0 / 64)
    return w1 * float(it(0, j, x))
