"""Error covariance K(k) = E e(k)^2 and the weighted cost.

Two independent routes are provided. :func:`error_covariance_closed` evaluates
the transition-product double sum; :func:`error_covariance_oracle` unrolls the
error recursion into an explicit linear map over (e(0), W1, W2) and takes the
quadratic form against the joint noise covariance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from . import kernels
from .model import FilterGain, SystemSpec, WeightSpec, _check_gain, derive_filter_coefficients
from .noise import autocovariance_table, covariance_matrix


def transition_product(h_gamma, i: int, k: int) -> float:
    """Product h[i] * ... * h[k-1]; 1 when ``i == k``."""
    h = np.asarray(h_gamma, dtype=float)
    if not (0 <= i <= k <= h.shape[0]):
        raise IndexError(f"need 0 <= i <= k <= {h.shape[0]}, got i={i}, k={k}")
    out = 1.0
    for j in range(i, k):
        out *= h[j]
    return out


def transition_products(h_gamma) -> np.ndarray:
    """Table ``P[i, k]`` of all transition products (see :mod:`fgnfilter.kernels`)."""
    return kernels.transition_table(np.ascontiguousarray(h_gamma, dtype=float))


def error_covariance_closed(system: SystemSpec, gain: FilterGain) -> np.ndarray:
    """K(0..N) from the closed-form double sum (diagonal plus twice the lower triangle)."""
    coef = derive_filter_coefficients(system, gain)
    n = system.horizon
    P = transition_products(coef.h_gamma)
    gg = np.ascontiguousarray(gain.gamma_gain * system.gamma)
    return kernels.k_closed(
        P,
        float(system.x0_var),
        np.ascontiguousarray(system.sigma),
        gg,
        autocovariance_table(system.noise1, n),
        autocovariance_table(system.noise2, n),
    )


@dataclass(frozen=True, eq=False)
class ErrorLinearMap:
    """e(k) = constant[k] + coefficients[k] @ (e(0), W1(0..N-1), W2(0..N-1))."""

    constant: np.ndarray
    coefficients: np.ndarray

    @property
    def horizon(self) -> int:
        return self.constant.shape[0] - 1


def error_linear_map(system: SystemSpec, gain: FilterGain, h_filter=None, m_filter=None) -> ErrorLinearMap:
    """Unroll the error recursion step by step.

    ``h_filter`` and ``m_filter`` override the filter coefficients H and M; by
    default they are the unbiased choice, which makes every constant term zero.
    With other choices the state and observation means leak into the error and
    show up in ``constant``.
    """
    _check_gain(system, gain)
    n = system.horizon
    g = gain.gamma_gain
    A, C, D, F = system.A, system.C, system.D, system.F
    unbiased = derive_filter_coefficients(system, gain)
    H = unbiased.h_gamma if h_filter is None else np.asarray(h_filter, dtype=float)
    M = unbiased.m_gamma if m_filter is None else np.asarray(m_filter, dtype=float)
    h_err = A - g * D
    y_mismatch = C - g * F - M
    z_mismatch = A - g * D - H

    width = 2 * n + 1
    # affine maps (constant, coefficient row) for x, y and e
    x_c, x_v = system.x0_mean, np.zeros(width)
    x_v[0] = 1.0
    y_c, y_v = 0.0, np.zeros(width)
    e_c, e_v = 0.0, x_v.copy()

    constant = np.zeros(n + 1)
    coefficients = np.zeros((n + 1, width))
    coefficients[0] = e_v
    for k in range(n):
        z_c, z_v = x_c - e_c, x_v - e_v
        new_e_c = h_err[k] * e_c + y_mismatch[k] * y_c + z_mismatch[k] * z_c
        new_e_v = h_err[k] * e_v + y_mismatch[k] * y_v + z_mismatch[k] * z_v
        new_e_v[1 + k] += system.sigma[k]
        new_e_v[1 + n + k] -= g[k] * system.gamma[k]

        new_x_c = A[k] * x_c + C[k] * y_c
        new_x_v = A[k] * x_v + C[k] * y_v
        new_x_v[1 + k] += system.sigma[k]
        new_y_c = D[k] * x_c + F[k] * y_c
        new_y_v = D[k] * x_v + F[k] * y_v
        new_y_v[1 + n + k] += system.gamma[k]

        x_c, x_v, y_c, y_v, e_c, e_v = new_x_c, new_x_v, new_y_c, new_y_v, new_e_c, new_e_v
        constant[k + 1] = e_c
        coefficients[k + 1] = e_v
    return ErrorLinearMap(constant, coefficients)


def joint_noise_covariance(system: SystemSpec) -> np.ndarray:
    """Covariance of (e(0), W1(0..N-1), W2(0..N-1)); the blocks are independent."""
    n = system.horizon
    return block_diag(
        np.array([[system.x0_var]]),
        covariance_matrix(system.noise1, n),
        covariance_matrix(system.noise2, n),
    )


def error_covariance_oracle(system: SystemSpec, gain: FilterGain, h_filter=None, m_filter=None) -> np.ndarray:
    """K(0..N) as the second moment of the explicit linear map."""
    lin = error_linear_map(system, gain, h_filter, m_filter)
    sigma = joint_noise_covariance(system)
    V = lin.coefficients
    return lin.constant**2 + np.einsum("ki,ij,kj->k", V, sigma, V)


def cost(K, weights: WeightSpec) -> float:
    """J = sum_k a(k) K(k)."""
    K = np.asarray(K, dtype=float)
    if K.shape != weights.a.shape:
        raise ValueError(f"K has length {K.shape[0]}, weights have length {weights.a.shape[0]}")
    return float(weights.a @ K)


@dataclass(frozen=True, eq=False)
class CovarianceReport:
    k_closed: np.ndarray
    k_oracle: np.ndarray
    cost: float
    max_discrepancy: float


def relative_discrepancy(k_closed, k_oracle) -> float:
    k_closed = np.asarray(k_closed)
    k_oracle = np.asarray(k_oracle)
    return float(np.max(np.abs(k_closed - k_oracle) / np.maximum(1.0, np.abs(k_oracle))))


def covariance_report(system: SystemSpec, gain: FilterGain, weights: WeightSpec) -> CovarianceReport:
    kc = error_covariance_closed(system, gain)
    ko = error_covariance_oracle(system, gain)
    return CovarianceReport(kc, ko, cost(ko, weights), relative_discrepancy(kc, ko))
