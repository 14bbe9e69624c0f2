import os
import subprocess
import sys

import numpy as np
import pytest

from fgnfilter import kernels
from fgnfilter._jit import BACKEND
from fgnfilter.noise import NoiseModel, covariance_matrix


def _pair(name):
    return getattr(kernels, f"{name}_nb"), getattr(kernels, f"{name}_np")


def _inputs(rng, n):
    P = kernels.transition_table_np(rng.uniform(-1.5, 1.5, n))
    rho1 = NoiseModel(0.7).table(n)
    rho2 = NoiseModel(0.85).table(n)
    return P, rho1, rho2


def test_dispatch_matches_backend():
    expected = "_nb" if BACKEND == "numba" else "_np"
    for name in ("psd_cholesky", "transition_table", "k_closed", "q_terms", "simulate_paths"):
        assert getattr(kernels, name) is getattr(kernels, name + expected)


@pytest.mark.parametrize("n", [1, 2, 7])
def test_transition_table_parity(rng, n):
    h = rng.uniform(-2, 2, n)
    nb, np_ = _pair("transition_table")
    P = np_(h)
    np.testing.assert_allclose(nb(h), P, rtol=1e-12, atol=1e-15)
    assert np.all(np.diag(P) == 1.0)
    assert np.all(np.tril(P, -1) == 0.0)


@pytest.mark.parametrize("n", [1, 3, 8])
def test_k_closed_parity(rng, n):
    P, rho1, rho2 = _inputs(rng, n)
    sigma, gg = rng.uniform(-1, 1, (2, n))
    nb, np_ = _pair("k_closed")
    np.testing.assert_allclose(nb(P, 0.4, sigma, gg, rho1, rho2), np_(P, 0.4, sigma, gg, rho1, rho2), rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("n", [1, 3, 8])
def test_q_terms_parity(rng, n):
    P, rho1, rho2 = _inputs(rng, n)
    sigma, gamma, gain, D = rng.uniform(-1, 1, (4, n))
    nb, np_ = _pair("q_terms")
    for a, b in zip(nb(P, 0.3, sigma, gamma, gain, D, rho1, rho2), np_(P, 0.3, sigma, gamma, gain, D, rho1, rho2)):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


def test_simulate_paths_parity(rng):
    n, p = 5, 40
    coefs = rng.uniform(-1, 1, (7, n))
    x0 = rng.normal(size=p)
    w1, w2 = rng.normal(size=(2, n, p))
    nb, np_ = _pair("simulate_paths")
    for a, b in zip(nb(*coefs, x0, w1, w2, 0.2), np_(*coefs, x0, w1, w2, 0.2)):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("h", [0.55, 0.9])
def test_cholesky_parity(h):
    C = covariance_matrix(NoiseModel(h), 64)
    nb, np_ = _pair("psd_cholesky")
    La, pa, ba = nb(C, kernels.PIVOT_CLAMP, kernels.PIVOT_FAIL)
    Lb, pb, bb = np_(C, kernels.PIVOT_CLAMP, kernels.PIVOT_FAIL)
    assert ba == bb == -1
    np.testing.assert_allclose(La, Lb, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(La @ La.T, C, atol=1e-12)


def test_cholesky_clamps_semidefinite():
    v = np.array([1.0, 2.0, -1.0])
    C = np.outer(v, v)
    for fn in _pair("psd_cholesky"):
        L, piv, bad = fn(C, kernels.PIVOT_CLAMP, kernels.PIVOT_FAIL)
        assert bad == -1
        np.testing.assert_allclose(L @ L.T, C, atol=1e-12)


def test_cholesky_flags_indefinite():
    C = np.array([[1.0, 2.0], [2.0, 1.0]])
    for fn in _pair("psd_cholesky"):
        _, piv, bad = fn(C, kernels.PIVOT_CLAMP, kernels.PIVOT_FAIL)
        assert bad == 1 and piv[1] < -kernels.PIVOT_FAIL


def test_env_flag_selects_numpy():
    env = dict(os.environ, FGNFILTER_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from fgnfilter._jit import BACKEND; print(BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_default_backend_is_numba():
    pytest.importorskip("numba")
    env = {k: v for k, v in os.environ.items() if k != "FGNFILTER_DISABLE_NUMBA"}
    out = subprocess.run(
        [sys.executable, "-c", "from fgnfilter._jit import BACKEND; print(BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numba"
