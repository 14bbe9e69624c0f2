import numpy as np
import pytest

from fgnfilter.covariance import (
    cost,
    covariance_report,
    error_covariance_closed,
    error_covariance_oracle,
    error_linear_map,
    relative_discrepancy,
    transition_product,
    transition_products,
)
from fgnfilter.model import FilterGain, SystemSpec, WeightSpec, derive_filter_coefficients
from fgnfilter.noise import NoiseModel
from fgnfilter.twostep import example_system

from conftest import random_instance
from oracles import example_k1, example_k2, example_row2


def make(n, **kw):
    base = dict(A=np.ones(n), C=np.zeros(n), sigma=np.zeros(n), D=np.zeros(n), F=np.zeros(n), gamma=np.zeros(n))
    base.update(kw)
    return SystemSpec(
        horizon=n,
        x0_mean=kw.pop("x0_mean", 0.0),
        x0_var=base.pop("x0_var", 0.0),
        noise1=base.pop("noise1", NoiseModel(0.7)),
        noise2=base.pop("noise2", NoiseModel(0.6)),
        **base,
    )


def test_transition_product_examples():
    assert transition_product([2.0, 3.0], 1, 1) == 1.0
    assert transition_product([2.0, 3.0], 0, 2) == 6.0
    assert transition_product([2.0, 0.0, 5.0], 0, 3) == 0.0
    with pytest.raises(IndexError):
        transition_product([2.0, 3.0], 2, 1)
    with pytest.raises(IndexError):
        transition_product([2.0, 3.0], 0, 3)


def test_transition_table_matches_products(rng):
    h = rng.uniform(-2, 2, 7)
    P = transition_products(h)
    for i in range(8):
        for k in range(8):
            expected = transition_product(h, i, k) if i <= k else 0.0
            assert P[i, k] == pytest.approx(expected, rel=1e-14, abs=0)


def test_no_noise_no_initial_variance_gives_zero():
    s = make(4, A=np.array([0.3, -1.0, 2.0, 0.5]))
    for K in (error_covariance_closed(s, FilterGain.zeros(4)), error_covariance_oracle(s, FilterGain.zeros(4))):
        assert np.all(K == 0.0)


def test_initial_variance_propagates_through_products(rng):
    A = rng.uniform(-1.5, 1.5, 5)
    D = rng.uniform(-1, 1, 5)
    s = make(5, A=A, D=D, x0_var=2.5)
    gain = FilterGain(rng.uniform(-1, 1, 5))
    h = derive_filter_coefficients(s, gain).h_gamma
    expected = [2.5 * transition_product(h, 0, k) ** 2 for k in range(6)]
    np.testing.assert_allclose(error_covariance_closed(s, gain), expected, rtol=1e-14)
    np.testing.assert_allclose(error_covariance_oracle(s, gain), expected, rtol=1e-14)


@pytest.mark.parametrize("rho", [0.25, 0.5, 0.75])
def test_example_zero_gain_gives_unit_variance(rho):
    s = example_system(rho)
    np.testing.assert_allclose(error_covariance_closed(s, FilterGain.zeros(2)), [0.0, 1.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(error_covariance_oracle(s, FilterGain.zeros(2)), [0.0, 1.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("rho", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("g", [(0.0, 0.0), (0.5, 2 / 7), (-1.3, 0.7), (2.0, -2.0)])
def test_example_against_symbolic_expansion(rho, g):
    s = example_system(rho)
    gain = FilterGain(g)
    expected = [0.0, example_k1(*g, rho), example_k2(*g, rho)]
    np.testing.assert_allclose(error_covariance_oracle(s, gain), expected, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(error_covariance_closed(s, gain), expected, rtol=1e-13, atol=1e-15)


def test_linear_map_first_rows(rng):
    system, gain, _ = random_instance(rng, horizon=4)
    lin = error_linear_map(system, gain)
    n = 4
    row0 = np.zeros(2 * n + 1)
    row0[0] = 1.0
    np.testing.assert_array_equal(lin.coefficients[0], row0)
    h = derive_filter_coefficients(system, gain).h_gamma
    row1 = np.zeros(2 * n + 1)
    row1[0] = h[0]
    row1[1] = system.sigma[0]
    row1[1 + n] = -gain.gamma_gain[0] * system.gamma[0]
    np.testing.assert_allclose(lin.coefficients[1], row1, rtol=1e-15)


def test_example_linear_map_row_two():
    g0, g1 = 0.8, -1.4
    lin = error_linear_map(example_system(0.5), FilterGain([g0, g1]))
    row = lin.coefficients[2]
    assert row[0] == pytest.approx(g0 * g1)  # (-g0)(-g1); immaterial since x0_var = 0
    np.testing.assert_allclose(row[[1, 2, 3, 4]], example_row2(g0, g1), rtol=1e-15)


def test_unbiased_constant_term_exactly_zero(rng):
    for _ in range(50):
        system, gain, _ = random_instance(rng)
        assert np.all(error_linear_map(system, gain).constant == 0.0)


def test_biased_filter_shows_up_in_constant_and_matches_x_minus_z(rng):
    # mismatched H, M: the error mean no longer vanishes; the oracle then adds
    # constant^2 and must still equal E (x - z)^2 computed by simulation
    system, gain, _ = random_instance(rng, horizon=3)
    system = SystemSpec(**{**system.__dict__, "x0_mean": 1.5})
    H = rng.uniform(-1, 1, 3)
    M = rng.uniform(-1, 1, 3)
    lin = error_linear_map(system, gain, H, M)
    assert np.any(lin.constant[1:] != 0.0)
    # deterministic check: zero all noise, then e(k) is the constant term
    quiet = SystemSpec(**{**system.__dict__, "sigma": np.zeros(3), "gamma": np.zeros(3), "x0_var": 0.0})
    x, y, z = system.x0_mean, 0.0, system.x0_mean
    g = gain.gamma_gain
    for k in range(3):
        x, y, z = (
            quiet.A[k] * x + quiet.C[k] * y,
            quiet.D[k] * x + quiet.F[k] * y,
            H[k] * z + M[k] * y + g[k] * (quiet.D[k] * x + quiet.F[k] * y),
        )
        assert error_linear_map(quiet, gain, H, M).constant[k + 1] == pytest.approx(x - z, abs=1e-13)


def test_oracle_identity_system():
    s = make(5, x0_var=1.0)
    np.testing.assert_allclose(error_covariance_oracle(s, FilterGain.zeros(5)), np.ones(6))


def test_closed_form_equals_oracle_random(rng):
    worst = 0.0
    for _ in range(300):
        system, gain, _ = random_instance(rng)
        worst = max(worst, relative_discrepancy(error_covariance_closed(system, gain), error_covariance_oracle(system, gain)))
    assert worst <= 1e-9


def test_nonnegative(rng):
    for _ in range(100):
        system, gain, _ = random_instance(rng, gain_box=4.0)
        assert error_covariance_oracle(system, gain).min() >= -1e-10
        assert error_covariance_closed(system, gain).min() >= -1e-10


def test_white_noise_recursion(rng):
    for _ in range(50):
        system, gain, _ = random_instance(rng, hursts=(0.5,))
        K = error_covariance_closed(system, gain)
        h = derive_filter_coefficients(system, gain).h_gamma
        g = gain.gamma_gain
        for k in range(system.horizon):
            rec = h[k] ** 2 * K[k] + system.sigma[k] ** 2 + (g[k] * system.gamma[k]) ** 2
            assert K[k + 1] == pytest.approx(rec, abs=1e-10)


def test_quadratic_scaling(rng):
    system, gain, _ = random_instance(rng, horizon=6)
    scaled = SystemSpec(
        **{**system.__dict__, "sigma": 2 * system.sigma, "gamma": 2 * system.gamma, "x0_var": 4 * system.x0_var}
    )
    np.testing.assert_allclose(error_covariance_closed(scaled, gain), 4 * error_covariance_closed(system, gain), rtol=1e-12)
    np.testing.assert_allclose(error_covariance_oracle(scaled, gain), 4 * error_covariance_oracle(system, gain), rtol=1e-12)


def test_cost_examples():
    assert cost([1.0, 1.0, 1.0], WeightSpec([1.0, 1.0, 1.0])) == 3.0
    assert cost([7.0, 3.0, 0.25], WeightSpec([0.0, 0.0, 1.0])) == 0.25
    assert cost([5.0, 1.0, 0.9], WeightSpec([0.0, 1.0, 1.0])) == pytest.approx(1.9, abs=1e-15)
    with pytest.raises(ValueError):
        cost([1.0, 2.0], WeightSpec([0.0, 1.0, 1.0]))


def test_report_fields(instance):
    system, gain, weights = instance
    rep = covariance_report(system, gain, weights)
    assert rep.k_closed[0] == rep.k_oracle[0] == system.x0_var
    assert rep.max_discrepancy <= 1e-9
    assert rep.cost == pytest.approx(weights.a @ rep.k_oracle)
