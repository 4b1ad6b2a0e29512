"""Named analytic weight families and weight systems.

Weights are referenced by registry name plus parameters so that experiment
configurations never carry code.  Every family supplies exact derivatives,
which the Chebyshevian basis needs at confluent knots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

__all__ = [
    "WeightFunction",
    "WeightSystem",
    "weight_family",
    "register_family",
    "FAMILIES",
    "modulus_of_continuity",
]


@dataclass(frozen=True)
class _Family:
    derivative: Callable[[np.ndarray, int, Mapping[str, float]], np.ndarray]
    defaults: Mapping[str, float]
    omega: Callable[[float, Mapping[str, float]], float] | None = None
    breakpoints: Callable[[Mapping[str, float]], tuple[float, ...]] = lambda p: ()
    smooth: bool = True


def _constant(x, order, p):
    if order == 0:
        return np.full_like(x, p["c"], dtype=float)
    return np.zeros_like(x, dtype=float)


def _one_plus_eps_sin(x, order, p):
    omega = 2.0 * math.pi * p["freq"]
    phase = p["phase"] + order * math.pi / 2
    val = p["eps"] * omega**order * np.sin(omega * x + phase)
    return val + 1.0 if order == 0 else val


def _sin_omega(delta, p):
    # sup |sin a - sin b| over |a - b| < 2*pi*f*delta
    arg = min(math.pi * p["freq"] * delta, math.pi / 2)
    return 2.0 * abs(p["eps"]) * math.sin(arg)


def _linear(x, order, p):
    if order == 0:
        return p["a"] + p["b"] * x
    if order == 1:
        return np.full_like(x, p["b"], dtype=float)
    return np.zeros_like(x, dtype=float)


def _exp(x, order, p):
    return p["scale"] * p["rate"] ** order * np.exp(p["rate"] * x)


def _exp_omega(delta, p):
    r = abs(p["rate"])
    d = min(delta, 1.0)
    return abs(p["scale"]) * (math.exp(r) - math.exp(r * (1.0 - d)))


def _step(x, order, p):
    if order == 0:
        return np.where(x < p["x0"], p["lo"], p["hi"]).astype(float)
    return np.zeros_like(x, dtype=float)


FAMILIES: dict[str, _Family] = {
    "constant": _Family(_constant, {"c": 1.0}, omega=lambda d, p: 0.0),
    "one_plus_eps_sin": _Family(
        _one_plus_eps_sin, {"eps": 0.1, "freq": 1.0, "phase": 0.0}, omega=_sin_omega
    ),
    "linear": _Family(
        _linear, {"a": 1.0, "b": 0.0}, omega=lambda d, p: abs(p["b"]) * min(d, 1.0)
    ),
    "exp": _Family(_exp, {"rate": 1.0, "scale": 1.0}, omega=_exp_omega),
    # discontinuous; only meant for negative fixtures
    "step": _Family(
        _step,
        {"x0": 0.5, "lo": 1.0, "hi": 2.0},
        omega=lambda d, p: abs(p["hi"] - p["lo"]) if d > 0 else 0.0,
        breakpoints=lambda p: (p["x0"],),
        smooth=False,
    ),
}


def register_family(name: str, derivative, defaults, omega=None, breakpoints=None, smooth=True):
    """Add a weight family to the registry.

    ``derivative(x, order, params)`` must return the ``order``-th derivative.
    """
    FAMILIES[name] = _Family(
        derivative,
        dict(defaults),
        omega=omega,
        breakpoints=breakpoints or (lambda p: ()),
        smooth=smooth,
    )


def modulus_of_continuity(f: Callable[[np.ndarray], np.ndarray], delta: float,
                          max_points: int = 1 << 18) -> float:
    """Sampled estimate of ``sup_{|x-y|<delta} |f(x) - f(y)|`` on [0, 1].

    Uses sliding-window max minus min on a grid of spacing ``delta/16``
    (capped at ``max_points`` samples).
    """
    if delta <= 0:
        return 0.0
    delta = min(delta, 1.0)
    npts = int(min(max_points, max(257, math.ceil(16.0 / delta) + 1)))
    x = np.linspace(0.0, 1.0, npts)
    v = f(x)
    width = max(1, int(math.floor(delta / (x[1] - x[0]))))
    if width >= npts - 1:
        return float(v.max() - v.min())
    from scipy.ndimage import maximum_filter1d, minimum_filter1d

    size = width + 1
    hi = maximum_filter1d(v, size, origin=-(size // 2), mode="nearest")
    lo = minimum_filter1d(v, size, origin=-(size // 2), mode="nearest")
    return float(np.max(hi - lo))


@dataclass(frozen=True)
class WeightFunction:
    """A positive function on [0, 1] drawn from a named analytic family."""

    name: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise KeyError(f"unknown weight family {self.name!r}")
        merged = dict(FAMILIES[self.name].defaults)
        unknown = set(self.params) - set(merged)
        if unknown:
            raise KeyError(f"unknown parameters for {self.name!r}: {sorted(unknown)}")
        merged.update({k: float(v) for k, v in self.params.items()})
        object.__setattr__(self, "params", merged)

    @property
    def family(self) -> _Family:
        return FAMILIES[self.name]

    @property
    def smooth(self) -> bool:
        return self.family.smooth

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(self.family.breakpoints(self.params))

    def __call__(self, x, order: int = 0):
        arr = np.asarray(x, dtype=float)
        out = self.family.derivative(arr, order, self.params)
        return out if arr.ndim else float(out)

    def omega(self, delta: float) -> float:
        """Modulus of continuity on [0, 1]."""
        if self.family.omega is not None:
            return float(self.family.omega(delta, self.params))
        return modulus_of_continuity(self, delta)

    def bounds(self, a: float = 0.0, b: float = 1.0, npts: int = 129) -> tuple[float, float]:
        """Sampled (min, max) over [a, b]."""
        v = self(np.linspace(a, b, npts))
        return float(v.min()), float(v.max())

    def jet(self, s: float, length: int) -> np.ndarray:
        """Taylor coefficients ``w^{(r)}(s)/r!`` for ``r < length``."""
        return np.array(
            [self(s, r) / math.factorial(r) for r in range(length)], dtype=float
        )

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, spec: Mapping) -> "WeightFunction":
        return cls(spec["name"], dict(spec.get("params", {})))


def weight_family(name: str, **params) -> WeightFunction:
    return WeightFunction(name, params)


class WeightSystem:
    """The weight vector ``(w_1, ..., w_k)`` generating a Chebyshevian space.

    ``weights[0]`` is ``w_1``.  ``bound`` is the smallest sampled ``M`` with
    ``1/M <= w_j <= M`` for every ``j``.
    """

    def __init__(self, weights: Sequence[WeightFunction]):
        if not weights:
            raise ValueError("a weight system needs at least one weight")
        self.weights = tuple(weights)
        self.order = len(self.weights)
        bound = 1.0
        for j, w in enumerate(self.weights, start=1):
            lo, hi = w.bounds(npts=1025)
            if lo <= 0:
                raise ValueError(f"weight w_{j} is not positive (min {lo:g})")
            bound = max(bound, hi, 1.0 / lo)
        self.bound = bound

    @classmethod
    def uniform(cls, k: int) -> "WeightSystem":
        return cls([WeightFunction("constant", {"c": 1.0})] * k)

    @classmethod
    def same(cls, k: int, w: WeightFunction) -> "WeightSystem":
        return cls([w] * k)

    def w(self, j: int) -> WeightFunction:
        """The weight ``w_j`` with 1-based ``j``."""
        if not 1 <= j <= self.order:
            raise IndexError(f"weight index {j} outside 1..{self.order}")
        return self.weights[j - 1]

    def omega(self, j: int, delta: float) -> float:
        return self.w(j).omega(delta)

    def max_omega(self, delta: float) -> float:
        return max(w.omega(delta) for w in self.weights)

    def is_smooth(self) -> bool:
        return all(w.smooth for w in self.weights)

    def minimized(self, a: float, b: float, npts: int = 129) -> "WeightSystem":
        """Constant weights equal to the sampled minima of each ``w_j`` on [a, b]."""
        return WeightSystem(
            [WeightFunction("constant", {"c": w.bounds(a, b, npts)[0]}) for w in self.weights]
        )

    def to_dict(self) -> list[dict]:
        return [w.to_dict() for w in self.weights]

    @classmethod
    def from_spec(cls, spec, k: int) -> "WeightSystem":
        """Build from one family spec (shared by all ``w_j``) or a list of ``k``."""
        if isinstance(spec, Mapping):
            return cls.same(k, WeightFunction.from_dict(spec))
        if len(spec) != k:
            raise ValueError(f"expected {k} weight specs, got {len(spec)}")
        return cls([WeightFunction.from_dict(s) for s in spec])

    def __repr__(self):
        names = ", ".join(f"{w.name}{dict(w.params)}" for w in self.weights)
        return f"WeightSystem(k={self.order}: {names})"
