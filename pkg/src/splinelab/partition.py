"""Interval partitions of [0, 1], measures on them, and knot sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import brentq

from .quadrature import composite_rule, panel_edges
from .weights import WeightFunction

__all__ = [
    "IntervalPartition",
    "Measure",
    "LEBESGUE",
    "KnotSequence",
    "uniform_partition",
    "random_partition",
    "mesh_norm",
    "refine_to_mesh",
    "knot_sequence",
    "atoms_in",
    "trace_coincides",
]


@dataclass(frozen=True, eq=False)
class IntervalPartition:
    """Atoms ``[b_0, b_1), [b_1, b_2), ..., [b_{n-1}, 1]`` of [0, 1]."""

    breakpoints: np.ndarray

    def __post_init__(self):
        bp = np.array(self.breakpoints, dtype=float).reshape(-1)
        if bp.size < 2:
            raise ValueError("a partition needs at least one atom")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        bp.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)

    def __eq__(self, other):
        if not isinstance(other, IntervalPartition):
            return NotImplemented
        return np.array_equal(self.breakpoints, other.breakpoints)

    def __hash__(self):
        return hash(self.breakpoints.tobytes())

    def __len__(self):
        return self.n_atoms

    @property
    def n_atoms(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        bp = self.breakpoints
        return list(zip(bp[:-1].tolist(), bp[1:].tolist()))

    def atom_index(self, x):
        """Index of the atom containing ``x`` (half-open atoms, last closed)."""
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        return np.clip(idx, 0, self.n_atoms - 1)

    def refines(self, coarse: "IntervalPartition", tol: float = 0.0) -> bool:
        """True if every breakpoint of ``coarse`` is a breakpoint of ``self``."""
        bp = self.breakpoints
        pos = np.clip(np.searchsorted(bp, coarse.breakpoints), 0, len(bp) - 1)
        near = np.minimum(np.abs(bp[pos] - coarse.breakpoints),
                          np.abs(bp[np.maximum(pos - 1, 0)] - coarse.breakpoints))
        return bool(np.all(near <= tol))

    def breakpoints_in(self, lo: float, hi: float) -> np.ndarray:
        bp = self.breakpoints
        return bp[(bp >= lo) & (bp <= hi)]

    def to_dict(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping) -> "IntervalPartition":
        return cls(np.asarray(data["breakpoints"], dtype=float))


def atoms_in(partition: IntervalPartition, lo: float, hi: float) -> list[int]:
    """Indices of atoms contained in [lo, hi]."""
    return [i for i, (a, b) in enumerate(partition.atoms) if a >= lo and b <= hi]


@dataclass(frozen=True, eq=False)
class Measure:
    """Lebesgue measure or ``dmu = w dx`` with a registered density ``w``.

    Densities are normalised to total mass 1 unless ``normalize=False``.
    ``bound`` is the smallest sampled ``M >= 1`` with ``1/M <= w <= M``
    (``inf`` when the density touches zero).
    """

    kind: str = "lebesgue"
    weight: WeightFunction | None = None
    normalize: bool = True
    scale: float = field(init=False, default=1.0)
    bound: float = field(init=False, default=1.0)

    def __post_init__(self):
        if self.kind not in ("lebesgue", "density"):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if (self.kind == "density") != (self.weight is not None):
            raise ValueError("a density measure needs exactly one weight function")
        if self.kind == "density":
            raw = self._raw_mass(0.0, 1.0)
            scale = 1.0 / raw if self.normalize else 1.0
            object.__setattr__(self, "scale", scale)
            v = scale * self.weight(np.linspace(0.0, 1.0, 2049))
            if np.any(v < 0):
                raise ValueError("density must be nonnegative")
            lo, hi = float(v.min()), float(v.max())
            bound = math.inf if lo <= 0 else max(1.0, hi, 1.0 / lo)
            object.__setattr__(self, "bound", bound)

    @classmethod
    def density(cls, name: str, normalize: bool = True, **params) -> "Measure":
        return cls("density", WeightFunction(name, params), normalize)

    @property
    def is_lebesgue(self) -> bool:
        return self.kind == "lebesgue"

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return () if self.weight is None else self.weight.breakpoints

    def density_values(self, x):
        if self.weight is None:
            return np.ones_like(np.asarray(x, dtype=float))
        return self.scale * self.weight(x)

    def _raw_mass(self, a: float, b: float) -> float:
        edges = panel_edges(a, b, self.weight.breakpoints, 1.0 / 64)
        x, w = composite_rule(edges, 20)
        return float(np.sum(w * self.weight(x)))

    def mass(self, a: float, b: float) -> float:
        """``mu([a, b])``."""
        if a > b:
            raise ValueError("interval bounds reversed")
        if self.weight is None or a == b:
            return float(b - a)
        return self.scale * self._raw_mass(a, b)

    def atom_masses(self, partition: IntervalPartition) -> np.ndarray:
        if self.weight is None:
            return partition.lengths.copy()
        return np.array([self.mass(a, b) for a, b in partition.atoms])

    def total(self) -> float:
        return self.mass(0.0, 1.0)

    def split_point(self, a: float, target: float, b: float) -> float:
        """The ``x`` in [a, b] with ``mu([a, x]) = target``."""
        if self.weight is None:
            return a + target
        return brentq(lambda x: self.mass(a, x) - target, a, b, xtol=1e-15, rtol=1e-14)

    def to_dict(self) -> dict:
        if self.weight is None:
            return {"kind": "lebesgue"}
        out = {"kind": "density", "name": self.weight.name, "params": dict(self.weight.params)}
        if not self.normalize:
            out["normalize"] = False
        return out

    @classmethod
    def from_dict(cls, data: Mapping | None) -> "Measure":
        if data is None or data.get("kind", "lebesgue") == "lebesgue":
            return LEBESGUE
        return cls("density", WeightFunction(data["name"], dict(data.get("params", {}))),
                   bool(data.get("normalize", True)))


LEBESGUE = Measure()


@dataclass(frozen=True, eq=False)
class KnotSequence:
    """Knots ``t_0 <= ... <= t_n`` with 0 and 1 repeated ``order`` times."""

    order: int
    knots: np.ndarray

    def __post_init__(self):
        t = np.array(self.knots, dtype=float).reshape(-1)
        k = int(self.order)
        if k < 1:
            raise ValueError("order must be a positive integer")
        if np.any(np.diff(t) < 0):
            raise ValueError("knots must be nondecreasing")
        _, counts = np.unique(t, return_counts=True)
        if counts.max() > k:
            raise ValueError(f"knot multiplicity {counts.max()} exceeds order {k}")
        if np.sum(t == 0.0) != k or np.sum(t == 1.0) != k:
            raise ValueError("0 and 1 must each appear exactly `order` times")
        if len(t) < k + 1:
            raise ValueError("too few knots")
        t.setflags(write=False)
        object.__setattr__(self, "order", k)
        object.__setattr__(self, "knots", t)

    def __len__(self):
        return len(self.knots)

    @property
    def n(self) -> int:
        """Largest knot index; the basis has ``n - k + 1`` functions."""
        return len(self.knots) - 1

    @property
    def count(self) -> int:
        return self.n - self.order + 1

    @property
    def breakpoints(self) -> np.ndarray:
        return np.unique(self.knots)

    def partition(self) -> IntervalPartition:
        return IntervalPartition(self.breakpoints)


def uniform_partition(n: int) -> IntervalPartition:
    if n < 1:
        raise ValueError("n must be at least 1")
    bp = np.arange(n + 1, dtype=float) / n
    return IntervalPartition(bp)


def random_partition(n: int, seed: int, grading: float = 10.0) -> IntervalPartition:
    """``n`` atoms with exponential lengths clipped to ``max/min <= grading``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if grading < 1:
        raise ValueError("grading must be >= 1")
    rng = np.random.default_rng(seed)
    raw = rng.exponential(size=n)
    lengths = np.maximum(raw, raw.max() / grading)
    if grading == 1:
        return uniform_partition(n)
    bp = np.concatenate(([0.0], np.cumsum(lengths) / lengths.sum()))
    bp[-1] = 1.0
    return IntervalPartition(bp)


def mesh_norm(partition: IntervalPartition, mu: Measure = LEBESGUE) -> float:
    """``max_A mu(A)`` over the atoms of ``partition``."""
    return float(np.max(mu.atom_masses(partition)))


def refine_to_mesh(coarse: IntervalPartition, mu: Measure, eps: float) -> IntervalPartition:
    """Split every atom of μ-mass above ``eps`` into equal-mass pieces.

    Atoms with mass ``<= eps`` are kept; an atom of mass ``m > eps`` becomes
    ``ceil(m / eps)`` pieces, so each piece has mass in ``[eps/2, eps]``.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    masses = mu.atom_masses(coarse)
    points = [0.0]
    for (a, b), m in zip(coarse.atoms, masses):
        if m > eps:
            pieces = math.ceil(m / eps - 1e-12)
            step = m / pieces
            if mu.is_lebesgue:
                points.extend(a + step * np.arange(1, pieces))
            else:
                lo = a
                for _ in range(pieces - 1):
                    lo = mu.split_point(lo, step, b)
                    points.append(lo)
        points.append(b)
    return IntervalPartition(np.array(points))


def knot_sequence(partition: IntervalPartition, k: int) -> KnotSequence:
    """Interior breakpoints once, 0 and 1 each ``k`` times."""
    if k < 1:
        raise ValueError("order must be a positive integer")
    inner = partition.breakpoints[1:-1]
    t = np.concatenate((np.zeros(k), inner, np.ones(k)))
    return KnotSequence(k, t)


def trace_coincides(fine: IntervalPartition, coarse: IntervalPartition,
                    lo: float, hi: float) -> bool:
    """True if both partitions have the same breakpoints in the closed [lo, hi]."""
    a = fine.breakpoints_in(lo, hi)
    b = coarse.breakpoints_in(lo, hi)
    return a.shape == b.shape and bool(np.all(a == b))
