import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from splinelab.bspline import ClassicalBasis
from splinelab.chebyshev import ChebyshevBasis
from splinelab.gram import (
    BandedMatrix,
    demko_fit,
    gram_matrix,
    inf_norm,
    invert,
    neumann_check,
)
from splinelab.partition import knot_sequence, random_partition, uniform_partition
from splinelab.weights import WeightSystem, weight_family


def _hat_gram(n):
    """Analytic order-2 Gram matrix on the uniform partition with n atoms."""
    m = n + 1
    g = np.zeros((m, m))
    for i in range(1, m - 1):
        g[i, i - 1 : i + 2] = (1 / 6, 2 / 3, 1 / 6)
    g[0, :2] = (2 / 3, 1 / 3)
    g[-1, -2:] = (1 / 3, 2 / 3)
    return g


def classical(n, k, seed=None, grading=10.0):
    p = uniform_partition(n) if seed is None else random_partition(n, seed, grading)
    return ClassicalBasis(knot_sequence(p, k))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_order_one_gram_is_identity(seed):
    g = gram_matrix(classical(13, 1, seed)).to_dense()
    assert np.allclose(g, np.eye(13), atol=1e-14)
    assert np.count_nonzero(g - np.diag(np.diag(g))) == 0


def test_order_two_rows():
    g = gram_matrix(classical(10, 2)).to_dense()
    assert np.allclose(g[5, 4:7], [1 / 6, 2 / 3, 1 / 6], atol=1e-12)
    assert np.allclose(g[0, :2], [2 / 3, 1 / 3], atol=1e-12)
    assert np.allclose(g, _hat_gram(10), atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_row_sums_and_bandwidth(k):
    g = gram_matrix(classical(17, k, seed=k, grading=500.0))
    assert np.allclose(g.row_sums(), 1.0, atol=1e-10)
    assert g.bandwidth == k - 1


def test_gram_symmetry_flag_only_when_verified():
    uniform_interior = BandedMatrix.from_dense(np.array([[2 / 3, 1 / 6], [1 / 6, 2 / 3]]))
    assert uniform_interior.is_symmetric()
    # boundary rows make the (M, N) Gram matrix non-symmetric
    assert not gram_matrix(classical(10, 2)).is_symmetric()


@given(st.integers(1, 12), st.integers(0, 3), st.integers(0, 3), st.integers(0, 999))
def test_banded_roundtrip(m, lower, upper, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, m))
    i, j = np.indices((m, m))
    a[(i - j > lower) | (j - i > upper)] = 0.0
    b = BandedMatrix.from_dense(a)
    assert np.array_equal(b.to_dense(), a)
    assert b.lower <= lower and b.upper <= upper
    assert inf_norm(b) == pytest.approx(inf_norm(a))


def test_inf_norm_examples():
    assert inf_norm(np.eye(5)) == 1.0
    assert inf_norm(_hat_gram(6)) == pytest.approx(1.0)
    assert inf_norm(np.zeros((3, 3))) == 0.0


def test_invert_examples():
    assert np.array_equal(invert(np.eye(4)).matrix, np.eye(4))
    r = invert(gram_matrix(classical(9, 1, seed=3)))
    assert r.inf_norm == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(np.linalg.LinAlgError):
        invert(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_order_two_inverse_norm_against_bruteforce():
    g = gram_matrix(classical(200, 2))
    r = invert(g)
    oracle = np.abs(np.linalg.inv(_hat_gram(200))).sum(axis=1).max()
    assert r.inf_norm == pytest.approx(oracle, rel=1e-12)
    # interior Toeplitz limit: 6 / sqrt(12) * (1 + s) / (1 - s), s = 2 - sqrt(3)
    s = 2 - np.sqrt(3)
    assert r.inf_norm == pytest.approx(6 / np.sqrt(12) * (1 + s) / (1 - s), rel=0.02)
    assert r.residual <= 1e-10


def test_demko_examples():
    fit = demko_fit(np.eye(6))
    assert fit.c == pytest.approx(1.0) and fit.q < 0.01 and fit.max_violation == 0
    fit = demko_fit(2 * np.eye(3))
    assert fit.c == pytest.approx(2.0) and fit.max_violation == 0
    g = gram_matrix(classical(200, 2))
    fit = demko_fit(invert(g).matrix, offset=g.bandwidth)
    assert fit.q == pytest.approx(2 - np.sqrt(3), rel=0.1)
    assert fit.max_violation == 0


def test_demko_reports_non_decay():
    fit = demko_fit(np.ones((5, 5)))
    assert not fit.ok


@given(st.integers(2, 4), st.integers(0, 500))
def test_demko_envelope_is_certified(k, seed):
    g = gram_matrix(classical(30, k, seed=seed, grading=200.0))
    inv = invert(g).matrix
    fit = demko_fit(inv, offset=g.bandwidth)
    assert fit.ok and 0 < fit.q < 1
    d = np.abs(np.subtract.outer(np.arange(len(inv)), np.arange(len(inv))))
    assert np.all(np.abs(inv) <= fit.c * fit.q**d + fit.max_violation)
    assert fit.max_violation <= 1e-12


def test_neumann_examples():
    g = _hat_gram(12)
    r = neumann_check(g, g)
    assert r.diff_norm == 0 and r.x_norm == 0 and r.contraction
    r = neumann_check(g, 1.1 * g)
    assert r.x_norm == pytest.approx(0.1) and r.contraction and r.inverse_bound_holds
    with pytest.raises(ValueError):
        neumann_check(g, np.eye(3))


def test_neumann_x_norm_decreases_under_refinement():
    k = 3
    ws = WeightSystem.same(k, weight_family("one_plus_eps_sin", eps=0.2))
    xs = []
    for n in (4, 8, 16, 32):
        kn = knot_sequence(uniform_partition(n), k)
        xs.append(neumann_check(gram_matrix(ClassicalBasis(kn)),
                                gram_matrix(ChebyshevBasis(kn, ws))).x_norm)
    assert all(b <= 1.1 * a for a, b in zip(xs, xs[1:]))
    assert xs[-1] < xs[0] / 4


def test_csv_export(tmp_path):
    g = gram_matrix(classical(5, 2))
    path = tmp_path / "g.csv"
    g.to_csv(path)
    assert np.array_equal(np.loadtxt(path, delimiter=","), g.to_dense())
