import math

import numpy as np
import pytest

from fgnfilter.twostep import (
    example_system,
    gamma1_from_gamma0,
    printed_conditions,
    quintic,
    quintic_coefficients,
    quintic_scale,
    real_roots,
    solve_two_step_example,
)

RHOS = [0.1, 0.25, 0.5, 0.75, 0.9]
WEIGHTS = [(1.0, 1.0), (1.0, 0.5), (0.2, 3.0), (0.0, 1.0), (1.0, 0.0)]


def test_example_system_lag_one():
    s = example_system(0.5)
    assert s.noise1.autocovariance(1) == pytest.approx(0.5, abs=1e-14)
    assert s.noise2 == s.noise1
    assert s.horizon == 2


def test_coefficients_agree_with_closed_form(rng):
    for _ in range(20):
        rho, a1, a2 = rng.uniform(0.01, 0.99), rng.uniform(0, 2), rng.uniform(0, 2)
        poly = np.polynomial.Polynomial(quintic_coefficients(rho, a1, a2))
        x = rng.uniform(-3, 3, 7)
        np.testing.assert_allclose(poly(x), quintic(x, rho, a1, a2), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("rho", RHOS)
@pytest.mark.parametrize("a1,a2", WEIGHTS)
def test_roots_have_small_residual(rho, a1, a2):
    for r in solve_two_step_example(rho, a1, a2):
        assert abs(r.poly_residual) <= 1e-9 * quintic_scale(r.gamma0, rho, a1, a2)
        assert abs(quintic(r.gamma0, rho, a1, a2)) == pytest.approx(abs(r.poly_residual))


@pytest.mark.parametrize("rho", RHOS)
@pytest.mark.parametrize("a1,a2", [(1.0, 1.0), (1.0, 0.5), (0.2, 3.0)])
def test_simple_roots_match_companion_matrix(rho, a1, a2):
    # np.roots is an independent route; keep its real roots inside the bracket
    companion = np.roots(quintic_coefficients(rho, a1, a2)[::-1])
    expected = sorted(z.real for z in companion if abs(z.imag) < 1e-7 and -10 <= z.real <= 10)
    found = real_roots(rho, a1, a2)
    assert len(found) == len(expected)
    np.testing.assert_allclose(found, expected, atol=1e-7)


@pytest.mark.parametrize("rho", RHOS)
def test_first_weight_zero_gives_known_roots(rho):
    # a1 = 0 leaves (rho + g)(1 + g)^4: a simple root at -rho, a quadruple one at -1
    roots = real_roots(rho, 0.0, 1.0)
    assert len(roots) == 2
    assert roots[0] == pytest.approx(-1.0, abs=1e-6)
    assert roots[1] == pytest.approx(-rho, abs=1e-10)


def test_second_weight_zero():
    roots = solve_two_step_example(0.5, 1.0, 0.0)
    assert [r.gamma0 for r in roots] == [0.0]
    assert math.isnan(roots[0].gamma1)


def test_vanishing_correlation():
    rho = 1e-8
    roots = solve_two_step_example(rho, 1.0, 1.0)
    near = [r for r in roots if abs(r.gamma0) < 1e-6]
    assert len(near) == 1
    assert near[0].gamma1 == pytest.approx(-1.0, abs=1e-6)


@pytest.mark.parametrize("rho", RHOS)
@pytest.mark.parametrize("a1,a2", [(1.0, 1.0), (0.2, 3.0), (1.0, 0.5)])
def test_roots_satisfy_printed_conditions(rho, a1, a2):
    for r in solve_two_step_example(rho, a1, a2):
        first, second = printed_conditions(rho, a1, a2, r.gamma0, r.gamma1)
        scale = max(1.0, abs(r.gamma0), abs(r.gamma1)) ** 4
        assert abs(first) <= 1e-9 * scale
        assert abs(second) <= 1e-9 * scale


def test_gamma1_elimination():
    g0, rho = 0.3, 0.4
    g1 = gamma1_from_gamma0(g0, rho)
    assert (rho * g0 + 1) * g1 + (1 + g0) ** 2 == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("rho,a1,a2", [(0.0, 1, 1), (1.0, 1, 1), (0.5, 0, 0), (0.5, -1, 1)])
def test_bad_arguments(rho, a1, a2):
    with pytest.raises(ValueError):
        solve_two_step_example(rho, a1, a2)


def test_root_indices_sequential():
    roots = solve_two_step_example(0.5, 1.0, 1.0)
    assert [r.index for r in roots] == list(range(len(roots)))
    assert all(r.gamma0 < 0 for r in roots)
