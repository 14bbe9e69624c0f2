"""Directional (Gateaux) derivatives of K and J with respect to the gain.

The derivative of K(k) in direction beta is ``sum_i Q(k-1, i) beta(i)`` with
``Q = Q1 + Q2 + Q3``: Q1 from the initial-variance term, Q2 from the explicit
gain dependence of the observation-noise term, Q3 from the gain dependence of
the transition products.

Two modes are offered:

``"paper"``
    The three terms transcribed exactly as published. Q1 lacks the factor
    D(i) and Q2, Q3 count each off-diagonal pair of the symmetric double sum
    once, so this is not the true derivative in general.
``"validated"``
    ``D(i) * Q1 + 2 * Q2 + 2 * Q3``, the exact derivative; agreement with
    :func:`fd_gradient` is what the test-suite certifies.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import kernels
from .covariance import cost, error_covariance_oracle, transition_product, transition_products
from .model import FilterGain, SystemSpec, WeightSpec, derive_filter_coefficients
from .noise import autocovariance_table

Mode = Literal["paper", "validated"]
MODES = ("paper", "validated")


def product_derivative(h_gamma, D, i: int, k: int, direction_index: int) -> float:
    """Coefficient of beta(j) in the derivative of h[i] * ... * h[k-1], j = direction_index.

    Zero when j lies outside ``[i, k)``, in particular for the empty product.
    """
    h = np.asarray(h_gamma, dtype=float)
    if not (0 <= i <= k <= h.shape[0]):
        raise IndexError(f"need 0 <= i <= k <= {h.shape[0]}, got i={i}, k={k}")
    j = direction_index
    if not (i <= j < k):
        return 0.0
    return -transition_product(h, i, j) * transition_product(h, j + 1, k) * float(D[j])


@dataclass(frozen=True, eq=False)
class QTable:
    """Lower-triangular tables indexed ``[k-1, i]``; ``q = q1 + q2 + q3``."""

    q1: np.ndarray
    q2: np.ndarray
    q3: np.ndarray
    mode: str

    @property
    def q(self) -> np.ndarray:
        return self.q1 + self.q2 + self.q3

    def entry(self, k_minus_1: int, i: int) -> tuple[float, float, float, float]:
        a, b, c = self.q1[k_minus_1, i], self.q2[k_minus_1, i], self.q3[k_minus_1, i]
        return float(a), float(b), float(c), float(a + b + c)


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def q_terms(system: SystemSpec, gain: FilterGain, mode: Mode = "validated") -> QTable:
    _check_mode(mode)
    n = system.horizon
    coef = derive_filter_coefficients(system, gain)
    P = transition_products(coef.h_gamma)
    q1, q2, q3 = kernels.q_terms(
        P,
        float(system.x0_var),
        np.ascontiguousarray(system.sigma),
        np.ascontiguousarray(system.gamma),
        np.ascontiguousarray(gain.gamma_gain),
        np.ascontiguousarray(system.D),
        autocovariance_table(system.noise1, n),
        autocovariance_table(system.noise2, n),
    )
    if mode == "validated":
        q1 = q1 * system.D[None, :]
        q2 = 2.0 * q2
        q3 = 2.0 * q3
    return QTable(q1, q2, q3, mode)


def gateaux_K(system: SystemSpec, gain: FilterGain, beta, mode: Mode = "validated") -> np.ndarray:
    """Directional derivative of K(1..N) along ``beta`` (entry ``k-1`` holds K~(k))."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (system.horizon,):
        raise ValueError(f"direction must have length {system.horizon}")
    return q_terms(system, gain, mode).q @ beta


def _gradient_from_table(table: QTable, weights: WeightSpec) -> np.ndarray:
    return weights.a[1:] @ table.q


def gradient(system: SystemSpec, gain: FilterGain, weights: WeightSpec, mode: Mode = "validated") -> np.ndarray:
    """g(i) = sum_{k=i+1}^{N} a(k) Q(k-1, i)."""
    if weights.horizon != system.horizon:
        raise ValueError("weights length does not match horizon")
    return _gradient_from_table(q_terms(system, gain, mode), weights)


def fd_gradient(system: SystemSpec, gain: FilterGain, weights: WeightSpec, h: float = 1e-6) -> np.ndarray:
    """Central differences of J, evaluated through the linear-map oracle."""
    if h <= 0:
        raise ValueError("step must be positive")
    base = gain.gamma_gain
    out = np.empty(system.horizon)
    for i in range(system.horizon):
        step = np.zeros_like(base)
        step[i] = h
        up = cost(error_covariance_oracle(system, FilterGain(base + step)), weights)
        down = cost(error_covariance_oracle(system, FilterGain(base - step)), weights)
        out[i] = (up - down) / (2.0 * h)
    return out


def stationarity_residual(system: SystemSpec, gain: FilterGain, weights: WeightSpec, mode: Mode = "validated") -> float:
    """max_i |g(i)|; zero exactly when the necessary condition holds."""
    return float(np.max(np.abs(gradient(system, gain, weights, mode))))


@dataclass(frozen=True, eq=False)
class GradientReport:
    q_table: QTable
    g: np.ndarray
    g_fd: np.ndarray
    residual: float
    mode: str

    @property
    def fd_error(self) -> np.ndarray:
        """Per-coordinate |g - g_fd| / max(1, |g_fd|)."""
        return np.abs(self.g - self.g_fd) / np.maximum(1.0, np.abs(self.g_fd))


def gradient_report(
    system: SystemSpec, gain: FilterGain, weights: WeightSpec, mode: Mode = "validated", h: float = 1e-6
) -> GradientReport:
    table = q_terms(system, gain, mode)
    g = _gradient_from_table(table, weights)
    g_fd = fd_gradient(system, gain, weights, h)
    return GradientReport(table, g, g_fd, float(np.max(np.abs(g))), mode)


def mode_signature(system: SystemSpec, gain: FilterGain) -> dict[str, np.ndarray]:
    """Ratios validated/paper for each Q component (NaN where the paper entry is zero).

    Expected: D(i) for Q1, exactly 2 for Q2 and Q3.
    """
    paper = q_terms(system, gain, "paper")
    valid = q_terms(system, gain, "validated")
    out = {}
    for name in ("q1", "q2", "q3"):
        p, v = getattr(paper, name), getattr(valid, name)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[name] = np.where(p != 0.0, v / np.where(p != 0.0, p, 1.0), np.nan)
    return out
