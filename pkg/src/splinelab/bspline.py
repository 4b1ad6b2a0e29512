"""Locally supported spline bases and classical polynomial B-splines.

Indices run over ``i = 0..n-k`` with ``M_i`` supported on ``[t_i, t_{i+k}]``.
``M_i`` is normalised in L1; ``N_i = (|supp M_i| / k) M_i`` is the
partition-of-unity normalisation.
"""

from __future__ import annotations

import numpy as np

from .partition import KnotSequence, Measure, LEBESGUE, IntervalPartition
from .quadrature import PiecewiseFunction

__all__ = [
    "SplineBasis",
    "ClassicalBasis",
    "ScaledBasis",
    "build_classical_basis",
    "evaluate_all",
]


class SplineBasis:
    """Common surface of classical, Chebyshevian and perturbed bases.

    Subclasses implement :meth:`eval_M`, returning a dense
    ``(len(x), count)`` array.  Evaluation is right-continuous at knots and
    left-continuous at ``x = 1``.
    """

    kind = "abstract"

    def __init__(self, knots: KnotSequence):
        self.knots = knots
        self.order = knots.order
        self.count = knots.count
        t = knots.knots
        k = self.order
        self.supports = np.column_stack((t[: self.count], t[k : k + self.count]))
        self.supports.setflags(write=False)

    # F-supports coincide with supports for every basis built on knots of the
    # partition; perturbed bases keep their parent's supports.
    @property
    def F_supports(self) -> np.ndarray:
        return self.supports

    @property
    def support_lengths(self) -> np.ndarray:
        return self.supports[:, 1] - self.supports[:, 0]

    @property
    def partition(self) -> IntervalPartition:
        return self.knots.partition()

    @property
    def breakpoints(self) -> np.ndarray:
        return self.knots.breakpoints

    def support_masses(self, mu: Measure = LEBESGUE) -> np.ndarray:
        """``mu(supp_F M_i)`` for every index."""
        if mu.is_lebesgue:
            return self.support_lengths.copy()
        bp = self.breakpoints
        atom_mass = mu.atom_masses(IntervalPartition(bp))
        cum = np.concatenate(([0.0], np.cumsum(atom_mass)))
        lo = np.searchsorted(bp, self.F_supports[:, 0])
        hi = np.searchsorted(bp, self.F_supports[:, 1])
        return cum[hi] - cum[lo]

    def n_scales(self, mu: Measure = LEBESGUE) -> np.ndarray:
        """Factors ``a_i = mu(supp_F M_i) / k`` turning ``M_i`` into ``N_i``."""
        return self.support_masses(mu) / self.order

    def eval_M(self, x) -> np.ndarray:
        raise NotImplementedError

    def eval_N(self, x, mu: Measure = LEBESGUE) -> np.ndarray:
        return self.eval_M(x) * self.n_scales(mu)[None, :]

    def M(self, i: int, x):
        x = np.asarray(x, dtype=float)
        return self.eval_M(x.reshape(-1))[:, i].reshape(x.shape)

    def N(self, i: int, x, mu: Measure = LEBESGUE):
        return self.M(i, x) * self.n_scales(mu)[i]

    def function(self, i: int, scale: float = 1.0) -> PiecewiseFunction:
        """``scale * M_i`` as a :class:`PiecewiseFunction`."""
        lo, hi = self.supports[i]
        bp = self.breakpoints
        inside = tuple(bp[(bp >= lo) & (bp <= hi)].tolist())
        return PiecewiseFunction(lambda x: scale * self.M(i, x), inside)

    def combination(self, coef, mu: Measure | None = None) -> PiecewiseFunction:
        """``sum_i coef_i M_i`` (or ``N_i`` when ``mu`` is given)."""
        c = np.asarray(coef, dtype=float)
        if mu is not None:
            c = c * self.n_scales(mu)

        def ev(x):
            x = np.asarray(x, dtype=float)
            return (self.eval_M(x.reshape(-1)) @ c).reshape(x.shape)

        return PiecewiseFunction(ev, tuple(self.breakpoints.tolist()))

    def __repr__(self):
        return f"{type(self).__name__}(k={self.order}, count={self.count})"


def _check_points(x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        x = x.reshape(-1)
    if np.any((x < 0) | (x > 1)) or np.any(~np.isfinite(x)):
        raise ValueError("evaluation points must lie in [0, 1]")
    return x


class ClassicalBasis(SplineBasis):
    """Polynomial B-splines of order ``k`` by the Cox-de Boor recurrence."""

    kind = "classical"

    def local(self, x):
        """Nonzero values on each point's knot span.

        Returns ``(first, vals)`` where ``vals[p, r]`` is ``N_{first[p]+r}(x_p)``
        for ``r = 0..k-1``.
        """
        x = _check_points(x)
        t = self.knots.knots
        k = self.order
        n = self.knots.n
        mu = np.searchsorted(t, x, side="right") - 1
        mu = np.clip(mu, k - 1, n - k)
        vals = np.zeros((len(x), k))
        vals[:, 0] = 1.0
        left = np.zeros((len(x), k))
        right = np.zeros((len(x), k))
        for j in range(1, k):
            left[:, j] = x - t[mu + 1 - j]
            right[:, j] = t[mu + j] - x
            saved = np.zeros(len(x))
            for r in range(j):
                temp = vals[:, r] / (right[:, r + 1] + left[:, j - r])
                vals[:, r] = saved + right[:, r + 1] * temp
                saved = left[:, j - r] * temp
            vals[:, j] = saved
        return mu - (k - 1), vals

    def eval_N(self, x, mu: Measure = LEBESGUE) -> np.ndarray:
        if not mu.is_lebesgue:
            return super().eval_N(x, mu)
        x = _check_points(x)
        first, vals = self.local(x)
        out = np.zeros((len(x), self.count))
        rows = np.repeat(np.arange(len(x)), self.order)
        cols = (first[:, None] + np.arange(self.order)[None, :]).reshape(-1)
        out[rows, cols] = vals.reshape(-1)
        return out

    def eval_M(self, x) -> np.ndarray:
        return self.eval_N(x) * (self.order / self.support_lengths)[None, :]


class ScaledBasis(SplineBasis):
    """``M_i^p = scales_i * M_i`` for a parent basis; supports are inherited."""

    kind = "perturbed"

    def __init__(self, parent: SplineBasis, scales):
        super().__init__(parent.knots)
        self.parent = parent
        self.scales = np.asarray(scales, dtype=float)
        if self.scales.shape != (self.count,):
            raise ValueError("one scale per basis function required")

    def eval_M(self, x) -> np.ndarray:
        return self.parent.eval_M(x) * self.scales[None, :]


def build_classical_basis(knots: KnotSequence) -> ClassicalBasis:
    return ClassicalBasis(knots)


def evaluate_all(basis: SplineBasis, x: float) -> list[tuple[int, float, float]]:
    """Nonzero ``(i, M_i(x), N_i(x))`` triples at a single point."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError("evaluation point must lie in [0, 1]")
    m = basis.eval_M(np.array([x]))[0]
    scale = basis.n_scales(LEBESGUE)
    return [(int(i), float(m[i]), float(m[i] * scale[i])) for i in np.flatnonzero(m)]
