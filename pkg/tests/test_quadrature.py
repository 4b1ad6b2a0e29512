import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from splinelab.quadrature import (
    IteratedIntegrals,
    PiecewiseFunction,
    g_kernel,
    gauss_legendre,
    inner_product,
    integrate,
    iterated_integral_table,
    panel_edges,
)
from splinelab.weights import WeightSystem, weight_family


@pytest.mark.parametrize("q", [1, 2, 5, 10, 16])
def test_gauss_legendre_symmetry_and_weight_sum(q):
    rule = gauss_legendre(q)
    assert rule.weights.sum() == pytest.approx(2.0, abs=1e-14)
    assert np.allclose(np.sort(rule.nodes), -np.sort(rule.nodes)[::-1], atol=1e-15)


@given(st.integers(1, 12), st.integers(0, 1000))
def test_gauss_exact_to_degree_2q_minus_1(q, seed):
    rng = np.random.default_rng(seed)
    coef = rng.standard_normal(2 * q)
    poly = np.polynomial.Polynomial(coef)
    exact = poly.integ()(1.0) - poly.integ()(-1.0)
    rule = gauss_legendre(q)
    assert np.dot(rule.weights, poly(rule.nodes)) == pytest.approx(exact, abs=1e-12 * (1 + abs(exact)))


def test_panel_edges():
    e = panel_edges(0.0, 1.0, [0.3, 2.0], 0.25)
    assert 0.3 in e and e[0] == 0.0 and e[-1] == 1.0
    assert np.max(np.diff(e)) <= 0.25 + 1e-15
    with pytest.raises(ValueError):
        panel_edges(1.0, 0.0)


def test_integrate_piecewise_with_breakpoint_is_exact():
    f = PiecewiseFunction(lambda x: np.where(x < 0.3, x**3, 1.0 - x), (0.3,))
    exact = 0.3**4 / 4 + (0.7 - (1 - 0.09) / 2)
    assert integrate(f, 0.0, 1.0) == pytest.approx(exact, abs=1e-15)
    assert integrate(f, 0.5, 0.5) == 0.0


def test_inner_product_with_density():
    from splinelab.partition import Measure

    mu = Measure.density("linear", normalize=False, a=1.0, b=1.0)
    val = inner_product(lambda x: x, lambda x: x, mu)
    assert val == pytest.approx(1 / 3 + 1 / 4, abs=1e-14)


def _nested_quad(chain, base, x, r):
    """Independent oracle: recursive scipy.quad."""
    if r == 1:
        return 1.0
    return quad(lambda t: chain[0](t) * _nested_quad(chain[1:], base, t, r - 1), base, x,
                epsabs=1e-13, epsrel=1e-13)[0]


def test_iterated_integrals_against_nested_quad():
    chain = [weight_family("one_plus_eps_sin", eps=0.3, freq=1.3),
             weight_family("exp", rate=0.8),
             weight_family("linear", a=1.0, b=0.4)]
    it = IteratedIntegrals(chain, 0.2, 0.9, breaks=[0.5])
    for x in (0.35, 0.5, 0.77, 0.9):
        for r in (2, 3):
            assert it(0, r, x) == pytest.approx(_nested_quad(chain, 0.2, x, r), rel=1e-10)
        assert it(1, 2, x) == pytest.approx(_nested_quad(chain[1:], 0.2, x, 2), rel=1e-10)


def test_iterated_integral_table_unit_weights_gives_monomials():
    ws = WeightSystem.uniform(4)
    grid = np.linspace(0, 1, 9)
    tab = iterated_integral_table(ws, 0, grid)
    for i in range(1, 6):
        assert np.allclose(tab[i - 1], grid ** (i - 1) / math.factorial(i - 1), atol=1e-14)


def test_g_kernel_unit_weights_is_truncated_power():
    ws = WeightSystem.uniform(3)
    # g_j(x, y) = (x - y)_+^{j-1} / (j-1)!
    assert g_kernel(ws, 3, 0.7, 0.2) == pytest.approx(0.125, abs=1e-14)
    assert g_kernel(ws, 3, 0.2, 0.7) == 0.0
    assert g_kernel(ws, 2, 0.9, 0.1, dy_order=1) == pytest.approx(-1.0, abs=1e-14)


def test_g_kernel_y_derivatives_against_finite_differences():
    ws = WeightSystem([weight_family("one_plus_eps_sin", eps=0.25, phase=0.4),
                       weight_family("exp", rate=0.5),
                       weight_family("linear", a=1.0, b=-0.3)])
    x, y, h = 0.8, 0.35, 1e-4
    g = lambda yy, d=0: g_kernel(ws, 3, x, yy, d)
    d1 = (g(y + h) - g(y - h)) / (2 * h)
    d2 = (g(y + h) - 2 * g(y) + g(y - h)) / h**2
    assert g(y, 1) == pytest.approx(d1, rel=1e-6)
    assert g(y, 2) == pytest.approx(d2, rel=1e-4)
    with pytest.raises(ValueError):
        g_kernel(ws, 2, x, y, dy_order=2)
