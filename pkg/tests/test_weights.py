import math

import numpy as np
import pytest

from splinelab.weights import (
    WeightFunction,
    WeightSystem,
    modulus_of_continuity,
    weight_family,
)


@pytest.mark.parametrize("name,params", [
    ("one_plus_eps_sin", {"eps": 0.2, "freq": 2.0, "phase": 0.3}),
    ("linear", {"a": 1.0, "b": 0.5}),
    ("exp", {"rate": -0.7, "scale": 2.0}),
])
def test_derivatives_match_central_differences(name, params):
    w = WeightFunction(name, params)
    x = np.linspace(0.1, 0.9, 7)
    h = 1e-5
    for order in (1, 2, 3):
        fd = (w(x + h, order - 1) - w(x - h, order - 1)) / (2 * h)
        assert np.allclose(w(x, order), fd, rtol=1e-6, atol=1e-6)


def test_jet_is_scaled_taylor_coefficients():
    w = weight_family("exp", rate=2.0)
    jet = w.jet(0.25, 4)
    expect = [math.exp(0.5) * 2.0**r / math.factorial(r) for r in range(4)]
    assert np.allclose(jet, expect, rtol=1e-14)


@pytest.mark.parametrize("delta", [0.01, 0.05, 0.2, 0.6])
def test_analytic_sine_modulus_agrees_with_sampling(delta):
    w = weight_family("one_plus_eps_sin", eps=0.1, freq=1.0)
    sampled = modulus_of_continuity(w, delta)
    assert sampled <= w.omega(delta) + 1e-12
    assert sampled >= 0.97 * w.omega(delta)


def test_constant_weight_has_zero_modulus():
    assert weight_family("constant", c=3.0).omega(0.3) == 0.0


def test_unknown_family_and_parameter_are_rejected():
    with pytest.raises(KeyError):
        WeightFunction("nope")
    with pytest.raises(KeyError):
        WeightFunction("linear", {"slope": 1.0})


def test_weight_system_bound_and_positivity():
    ws = WeightSystem.same(3, weight_family("one_plus_eps_sin", eps=0.3))
    assert ws.order == 3
    assert ws.bound == pytest.approx(1 / 0.7, rel=1e-4)
    with pytest.raises(ValueError):
        WeightSystem([weight_family("linear", a=-0.5, b=1.0)])


def test_weight_system_spec_roundtrip():
    ws = WeightSystem.from_spec([{"name": "constant"}, {"name": "exp", "params": {"rate": 1}}], 2)
    again = WeightSystem.from_spec(ws.to_dict(), 2)
    assert again.to_dict() == ws.to_dict()
    with pytest.raises(ValueError):
        WeightSystem.from_spec([{"name": "constant"}], 2)


def test_minimized_weights_are_constant_minima():
    ws = WeightSystem.same(2, weight_family("linear", a=1.0, b=1.0))
    frozen = ws.minimized(0.25, 0.75)
    assert all(w.name == "constant" for w in frozen.weights)
    assert frozen.w(1).params["c"] == pytest.approx(1.25)
