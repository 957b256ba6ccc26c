import itertools

import numpy as np
import pytest

from spiralspline.errors import NegativeDiscriminant
from spiralspline.estimator import (
    all_sigmas,
    as_sigma,
    estimate,
    estimate_b_stage1,
    estimate_n2,
    index_from_sigma,
    recover_cda,
    rho_endpoints,
    rho_interior,
    sigma_from_index,
    stage1_system,
    stage2_system,
)
from spiralspline.geometry import elastic_energy, validate


def test_sigma_encoding():
    assert sigma_from_index(1, 2) == (1, -1)
    assert sigma_from_index(2, 2) == (-1, 1)
    assert sigma_from_index(3, 2) == (-1, -1)
    assert sigma_from_index(4, 2) == (1, 1)
    assert sigma_from_index(26, 5) == (-1, -1, 1, -1, 1)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_sigma_round_trip(n):
    seen = set()
    for p, s in all_sigmas(n):
        assert index_from_sigma(s) == p
        seen.add(s)
    assert seen == set(itertools.product((-1, 1), repeat=n))


def test_sigma_validation():
    with pytest.raises(ValueError):
        as_sigma([1, 0, -1])
    with pytest.raises(ValueError):
        as_sigma([1, -1], n=3)
    with pytest.raises(ValueError):
        sigma_from_index(0, 3)
    with pytest.raises(ValueError):
        sigma_from_index(9, 3)


# reference energies for the three-point example
EX1_ENERGIES = {(1, 1): 17.60, (-1, 1): 10.59, (1, -1): 4.12, (-1, -1): 5.39}


@pytest.mark.parametrize("sigma,energy", sorted(EX1_ENERGIES.items()))
def test_two_segment_energies(ex1, sigma, energy):
    e = estimate(validate(ex1), sigma)
    assert elastic_energy(e) == pytest.approx(energy, abs=0.05)


def test_two_segment_ranking(ex1):
    ch = validate(ex1)
    order = sorted(EX1_ENERGIES, key=lambda s: elastic_energy(estimate(ch, s)))
    assert order == [(1, -1), (-1, -1), (-1, 1), (1, 1)]


def test_rho_endpoint_formula(ex1):
    ch = validate(ex1)
    r1, r2 = rho_endpoints(ch, (1, -1))
    k, L = ch.curvatures, ch.lengths
    assert r1 == pytest.approx(k[0] * np.sqrt(1 - k[0] ** 2 * L[0] ** 2 / 20))
    assert r2 == pytest.approx(-k[1] * np.sqrt(1 - k[1] ** 2 * L[1] ** 2 / 20))


def test_rho_interior_formula(ex4):
    ch = validate(ex4)
    b = np.array([0.0, 0.4, -0.3, 0.2, 0.1])
    rho = rho_interior(ch, (1, -1, 1, -1, 1), b)
    k, L = ch.curvatures, ch.lengths
    j = 2
    assert rho.values[j] == pytest.approx(np.sqrt(k[j] ** 2 * (1 - k[j] ** 2 * L[j] ** 2 / 20) - 0.5**2 / 60))
    assert rho.values[1] < 0


def test_stage_systems_dominant(ex4, circle):
    for prob in (ex4, circle):
        ch = validate(prob)
        assert stage1_system(ch).is_diagonally_dominant()
        rho = rho_interior(ch, (1,) * ch.n, estimate_b_stage1(ch)).values
        assert stage2_system(ch, rho).is_diagonally_dominant()


def test_stage_systems_against_dense(ex4):
    ch = validate(ex4)
    s1 = stage1_system(ch)
    b2 = estimate_b_stage1(ch)
    np.testing.assert_allclose(b2, np.linalg.solve(s1.dense(), s1.rhs), atol=1e-12)
    assert b2[0] == 0.0


@pytest.mark.parametrize("p", [1, 7, 26, 32])
def test_estimate_is_natural_c1(ex4, p):
    e = estimate(validate(ex4), sigma_from_index(p, 5))
    res = e.continuity_residuals()
    assert max(res.values()) < 1e-12


def test_n2_estimate_is_natural_c1(ex1):
    for _, s in all_sigmas(2):
        res = estimate_n2(validate(ex1), s).continuity_residuals()
        assert max(res.values()) < 1e-12


def test_recover_reproduces_chord_angles(ex4):
    # the mean of theta over each segment matches the chord direction to leading order
    ch = validate(ex4)
    e = estimate(ch, (-1, -1, 1, -1, 1))
    L = ch.lengths
    mean = e.a + e.b * L / 2 + e.c * L**2 / 3 + e.d * L**3 / 4
    np.testing.assert_allclose(mean, ch.angles, atol=1e-12)


def test_recover_default_rho(ex4):
    ch = validate(ex4)
    b = estimate_b_stage1(ch)
    s = (1, -1, 1, -1, 1)
    a = recover_cda(ch, s, b)
    b_ = recover_cda(ch, s, b, rho=rho_interior(ch, s, b).values)
    np.testing.assert_array_equal(a.coefficients, b_.coefficients)


def test_all_branches_estimate(ex4, circle):
    for prob in (ex4, circle):
        ch = validate(prob)
        for _, s in all_sigmas(prob.n):
            assert np.isfinite(elastic_energy(estimate(ch, s)))


def test_circle_energy_extremes(circle):
    ch = validate(circle)
    energies = {s: elastic_energy(estimate(ch, s)) for _, s in all_sigmas(7)}
    top = max(energies, key=energies.get)
    assert top == (-1,) * 7
    assert energies[top] == pytest.approx(37.21, abs=0.5)
    assert energies[(1,) * 7] == pytest.approx(2.125, abs=0.01)


def test_negative_discriminant(ex4):
    # a grossly wrong slope jump makes the interior square-root argument negative
    ch = validate(ex4)
    with pytest.raises(NegativeDiscriminant) as info:
        rho_interior(ch, (1,) * 5, np.array([0.0, 50.0, -50.0, 0.0, 0.0]))
    assert info.value.index == 1
    assert info.value.value < 0


def test_ex4_estimate_energies_frozen(ex4):
    # regression values computed once from these data
    ch = validate(ex4)
    expect = {26: 17.065, 21: 24.397, 10: 19.265, 32: 95.233, 16: 77.504, 24: 59.746}
    for p, val in expect.items():
        assert elastic_energy(estimate(ch, sigma_from_index(p, 5))) == pytest.approx(val, abs=1e-3)
