import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.interpolate import BSpline

from splinelab.bspline import ClassicalBasis
from splinelab.partition import (
    LEBESGUE,
    Measure,
    knot_sequence,
    random_partition,
    refine_to_mesh,
    uniform_partition,
)
from splinelab.projector import (
    Projector,
    common_atoms,
    dual_basis,
    lobatto_samples,
    operator_inf_norm,
    project,
    projector_difference,
)
from splinelab.quadrature import PiecewiseFunction, inner_product

SINE_MU = Measure.density("one_plus_eps_sin", eps=0.3)


def projector(n, k, seed=None, mu=LEBESGUE):
    p = uniform_partition(n) if seed is None else random_partition(n, seed, 20.0)
    return Projector(ClassicalBasis(knot_sequence(p, k)), mu)


def random_function(seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(5)
    x0 = float(rng.uniform(0.05, 0.95))
    return PiecewiseFunction(
        lambda x: c[0] + c[1] * x**2 + c[2] * np.cos(5 * x) + c[3] * np.sign(x - x0)
        + c[4] * np.abs(x - 0.5), (x0, 0.5))


def test_fixes_basis_functions():
    P = projector(9, 3, seed=1, mu=SINE_MU)
    f = P.basis.combination(np.eye(P.count)[2], SINE_MU)
    assert np.allclose(project(P, f).coef, np.eye(P.count)[2], atol=1e-10)


def test_order_one_is_conditional_expectation():
    P = projector(7, 1, seed=4, mu=SINE_MU)
    f = random_function(3)
    pf = project(P, f)
    for a, b in P.partition.atoms:
        num = quad(lambda x: f(x) * SINE_MU.density_values(x), a, b, limit=200,
                   points=[p for p in f.breakpoints if a < p < b] or None)[0]
        assert pf(0.5 * (a + b)) == pytest.approx(num / SINE_MU.mass(a, b), abs=1e-9)


def test_linears_reproduced_by_order_two():
    P = projector(11, 2, seed=2)
    pf = project(P, PiecewiseFunction(lambda x: x))
    t = np.linspace(0, 1, 301)
    assert np.max(np.abs(pf(t) - t)) <= 1e-10


@given(st.integers(0, 10_000), st.sampled_from([1, 2, 3, 4]))
def test_idempotent_selfadjoint_contractive(seed, k):
    P = projector(8, k, seed=seed % 50, mu=SINE_MU)
    f, g = random_function(seed), random_function(seed + 1)
    pf, pg = project(P, f), project(P, g)
    assert np.allclose(project(P, pf.function).coef, pf.coef, atol=1e-8)
    lhs = inner_product(pf.function, g, SINE_MU)
    rhs = inner_product(f, pg.function, SINE_MU)
    assert lhs == pytest.approx(rhs, abs=1e-8)
    nf = inner_product(f, f, SINE_MU) ** 0.5
    npf = inner_product(pf.function, pf.function, SINE_MU) ** 0.5
    assert npf <= nf + 1e-8


def test_b_matrix_symmetric():
    P = projector(15, 3, seed=5, mu=SINE_MU)
    assert P.symmetry_defect() <= 1e-8


def test_operator_norm_order_one_is_one():
    assert operator_inf_norm(projector(9, 1, seed=2, mu=SINE_MU)).value == pytest.approx(1.0, abs=1e-12)


def test_operator_norm_order_two_uniform_stable():
    vals = [operator_inf_norm(projector(n, 2)).value for n in (32, 64, 128)]
    assert all(1.0 <= v <= 3.0 for v in vals)
    assert max(vals) / min(vals) <= 1.02


def test_operator_norm_against_dense_least_squares_oracle():
    """Discrete least squares on a fine Gauss grid with scipy B-splines."""
    n, k = 8, 2
    P = projector(n, k)
    t = knot_sequence(uniform_partition(n), k).knots
    xg, wg = np.polynomial.legendre.leggauss(40)
    edges = np.linspace(0, 1, 8 * n + 1)
    s = ((edges[:-1, None] + edges[1:, None]) / 2 + (np.diff(edges)[:, None] / 2) * xg).ravel()
    w = (np.diff(edges)[:, None] / 2 * wg).ravel()
    B = BSpline.design_matrix(s, t, k - 1).toarray()
    proj = B @ np.linalg.solve(B.T @ (B * w[:, None]), (B * w[:, None]).T)
    tt = lobatto_samples(P.partition, 8)
    Bt = BSpline.design_matrix(tt, t, k - 1).toarray()
    kern = Bt @ np.linalg.solve(B.T @ (B * w[:, None]), B.T)
    oracle = np.max(np.abs(kern) @ w)
    assert operator_inf_norm(P).value == pytest.approx(oracle, rel=1e-3)
    assert proj.shape[0] == len(s)


def test_operator_norm_constant_density_matches_lebesgue():
    leb = operator_inf_norm(projector(10, 3, seed=1)).value
    const = operator_inf_norm(projector(10, 3, seed=1, mu=Measure.density("constant", c=2.5))).value
    assert const == pytest.approx(leb, abs=1e-10)


def test_operator_norm_monotone_in_sampling():
    P = projector(6, 3, seed=8, mu=SINE_MU)
    vals = [operator_inf_norm(P, s).value for s in (4, 5, 6, 8, 11)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        operator_inf_norm(P, 3)


def test_dual_basis_biorthogonal():
    P = projector(12, 3, seed=6, mu=SINE_MU)
    D = dual_basis(P)
    assert np.allclose(D.biorthogonality(), np.eye(P.count), atol=1e-8)


def test_dual_basis_order_one():
    P = projector(5, 1, seed=3)
    D = dual_basis(P)
    t = np.array([0.5 * (a + b) for a, b in P.partition.atoms])
    assert np.allclose(D(t), np.diag(1.0 / np.diff(P.partition.breakpoints)), rtol=1e-12)


def test_dual_basis_order_one_with_density():
    # N_i = mu(A)/|A| on A, so the dual is |A| / mu(A)^2 there
    P = projector(5, 1, seed=3, mu=SINE_MU)
    t = np.array([0.5 * (a + b) for a, b in P.partition.atoms])
    lens = np.diff(P.partition.breakpoints)
    masses = SINE_MU.atom_masses(P.partition)
    assert np.allclose(dual_basis(P)(t), np.diag(lens / masses**2), rtol=1e-10)


def test_dual_basis_decay_matches_fit():
    P = projector(100, 2)
    D = dual_basis(P)
    t = np.linspace(0, 1, 4001)
    c1, q = D.decay_constant(t)
    vals = np.abs(D(t))
    j = D.first_index(t)
    i = 50
    peak = vals[:, i].max()
    far = vals[np.abs(j - i) == 10, i].max()
    assert q**10 / 5 <= far / peak <= 5 * q**10
    mass = P.basis.support_masses()
    dist = np.abs(np.arange(P.count)[None, :] - j[:, None])
    assert np.all(vals <= c1 * q**dist / mass[None, :] * (1 + 1e-12))


def _pair(seed, k=2, mu=SINE_MU):
    G = random_partition(10, seed, 10.0)
    from splinelab.partition import mesh_norm

    F = refine_to_mesh(G, mu, mesh_norm(G, mu) / 3)
    mk = lambda p: Projector(ClassicalBasis(knot_sequence(p, k)), mu)
    return mk(F), mk(G), F, G


def test_difference_same_partition_is_zero():
    PF, _, _, _ = _pair(1)
    r = projector_difference(PF, PF, random_function(2))
    assert r.sup_diff == 0.0 and r.expansion_check


def test_difference_vanishes_on_coarse_space():
    PF, PG, _, _ = _pair(2)
    f = PG.basis.combination(np.random.default_rng(0).standard_normal(PG.count), SINE_MU)
    assert projector_difference(PF, PG, f).sup_diff <= 1e-8


def test_expansion_coefficients_vanish_on_common_atoms():
    PF, PG, F, G = _pair(3)
    U = common_atoms(F, G)
    a, b = U[len(U) // 2]
    x0 = 0.5 * (a + b)
    f = PiecewiseFunction(lambda x: np.sign(x - x0), (x0,))
    r = projector_difference(PF, PG, f)
    assert r.in_common.any()
    assert r.expansion_check and r.expansion_max <= 1e-8
    # outside U the coefficients are not forced to vanish
    assert np.max(np.abs(r.d[~r.in_common])) > 1e-6


def test_difference_rejects_non_nested():
    PF, PG, _, _ = _pair(4)
    other = projector(7, 2, seed=99, mu=SINE_MU)
    with pytest.raises(ValueError):
        projector_difference(other, PG, lambda x: x)
