import numpy as np
import pytest

from splinelab.bspline import ClassicalBasis
from splinelab.partition import (
    LEBESGUE,
    IntervalPartition,
    Measure,
    knot_sequence,
    random_partition,
    uniform_partition,
)
from splinelab.perturb import (
    band_constant,
    check_compatibility,
    check_conditions,
    family_basis,
    weighted_perturbed_basis,
)
from splinelab.weights import WeightSystem, weight_family


def classical(n, k):
    return ClassicalBasis(knot_sequence(uniform_partition(n), k))


def _bound(mu):
    x = np.linspace(0, 1, 2001)
    w = mu.density_values(x)
    return max(w.max(), (1 / w).max())


def test_weighted_basis_examples():
    b = classical(6, 3)
    x = np.linspace(0, 1, 97)
    assert np.array_equal(weighted_perturbed_basis(b, LEBESGUE).eval_M(x), b.eval_M(x))
    mu = Measure.density("constant", normalize=False, c=3.0)
    assert np.allclose(weighted_perturbed_basis(b, mu).eval_M(x), b.eval_M(x) / 3.0)
    b = classical(2, 2)
    mu = Measure.density("linear", normalize=False, a=1.0, b=0.5)
    p = weighted_perturbed_basis(b, mu)
    assert np.allclose(p.eval_M(x)[:, 1], b.eval_M(x)[:, 1] / 1.25)


def test_weighted_basis_rejects_nonpositive_density():
    mu = Measure.density("step", x0=0.5, lo=0.0, hi=2.0)
    with pytest.raises(ValueError):
        weighted_perturbed_basis(classical(4, 2), mu)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_classical_is_perturbation_of_itself(k):
    b = ClassicalBasis(knot_sequence(random_partition(12, k, 50.0), k))
    r = check_conditions(b, b)
    assert r.theta_proxy == 0.0
    assert r.norm_C <= k * (1 + 1e-12)
    assert r.band_C == k
    assert all(v >= 0 for v in r.to_dict().values())


@pytest.mark.parametrize("k", [2, 3])
def test_weighted_norm_constant(k):
    mu = Measure.density("one_plus_eps_sin", eps=0.3)
    r = check_conditions(classical(16, k), family_basis(uniform_partition(16), k, "weighted", mu=mu), mu)
    assert r.norm_C <= k * _bound(mu) ** 2
    assert r.band_C == k


def _sweep(family, k, mu, ws=None):
    out = []
    for n in (8, 16, 32, 64):
        p = uniform_partition(n)
        out.append(check_conditions(ClassicalBasis(knot_sequence(p, k)),
                                    family_basis(p, k, family, ws, mu), mu).theta_proxy)
    return out


def test_weighted_theta_decreases():
    mu = Measure.density("one_plus_eps_sin", eps=0.1)
    th = _sweep("weighted", 2, mu)
    assert all(b <= 1.1 * a for a, b in zip(th, th[1:]))
    assert th[-1] < th[0] / 4


def test_chebyshev_theta_decreases():
    ws = WeightSystem.same(3, weight_family("one_plus_eps_sin", eps=0.2))
    th = _sweep("chebyshev", 3, LEBESGUE, ws)
    assert all(b <= 1.1 * a for a, b in zip(th, th[1:]))
    assert th[-1] < th[0] / 4


def test_chebyshev_unit_weights_theta_vanishes():
    p = random_partition(9, 4, 20.0)
    r = check_conditions(ClassicalBasis(knot_sequence(p, 3)),
                         family_basis(p, 3, "chebyshev", WeightSystem.uniform(3)))
    assert r.theta_proxy <= 1e-8


def test_step_density_theta_does_not_vanish():
    # discontinuous weight: the jump stays inside one support at every mesh size
    mu = Measure.density("step", x0=0.3337, lo=1.0, hi=2.0)
    th = _sweep("weighted", 2, mu)
    assert min(th) > 0.05


def test_band_constant_counts_overlaps():
    assert band_constant(classical(10, 1)) == 1
    assert band_constant(classical(10, 4)) == 4


def test_mismatched_counts_rejected():
    with pytest.raises(ValueError):
        check_conditions(classical(5, 2), classical(6, 2))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_classical_compatible(k):
    coarse = random_partition(8, k, 10.0)
    cut = coarse.breakpoints[4]
    extra = cut * random_partition(5, 7, 10.0).breakpoints
    fine = IntervalPartition(np.union1d(coarse.breakpoints, extra))
    assert fine.n_atoms > coarse.n_atoms
    r = check_compatibility(coarse, fine, k, region=(cut, 1.0))
    assert r.nested and r.local and r.local_count > 0


def test_compatibility_local_region():
    coarse = uniform_partition(4)
    fine = IntervalPartition(np.array([0, 0.125, 0.25, 0.5, 0.75, 1.0]))
    r = check_compatibility(coarse, fine, 2, region=(0.25, 1.0))
    assert r.nested and r.local and r.local_count > 0


def test_weighted_and_chebyshev_compatible():
    coarse = uniform_partition(4)
    fine = IntervalPartition(np.array([0, 0.125, 0.25, 0.5, 0.75, 1.0]))
    mu = Measure.density("one_plus_eps_sin", eps=0.3)
    r = check_compatibility(coarse, fine, 3, "weighted", region=(0.25, 1.0), mu=mu)
    assert r.nested and r.local
    ws = WeightSystem.same(3, weight_family("one_plus_eps_sin", eps=0.2))
    r = check_compatibility(coarse, fine, 3, "chebyshev", ws, region=(0.25, 1.0))
    assert r.nested and r.local and r.local_count > 0


def test_compatibility_same_partition():
    p = random_partition(7, 3, 10.0)
    r = check_compatibility(p, p, 3)
    assert r.nested and r.local and r.nested_residual <= 1e-12


def test_compatibility_preconditions():
    coarse = uniform_partition(4)
    fine = IntervalPartition(np.array([0, 0.125, 0.25, 0.5, 0.75, 1.0]))
    with pytest.raises(ValueError):
        check_compatibility(coarse, fine, 2, region=(0.0, 0.5))
    with pytest.raises(ValueError):
        check_compatibility(fine, coarse, 2)
    with pytest.raises(ValueError):
        family_basis(coarse, 2, "chebyshev")
    with pytest.raises(KeyError):
        family_basis(coarse, 2, "nope")
