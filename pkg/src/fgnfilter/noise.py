"""Fractional Gaussian noise: exact autocovariance and a seeded sampler."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels


class FactorizationError(np.linalg.LinAlgError):
    """The Toeplitz covariance is numerically not positive semidefinite."""


@dataclass(frozen=True)
class NoiseModel:
    """Unit-step increments of a fractional Brownian motion with Hurst ``hurst``.

    ``hurst = 1/2`` is admitted and gives white noise.
    """

    hurst: float

    def __post_init__(self):
        h = float(self.hurst)
        if not (0.5 <= h < 1.0) or math.isnan(h):
            raise ValueError(f"Hurst must lie in [1/2, 1), got {self.hurst!r}")
        object.__setattr__(self, "hurst", h)

    @classmethod
    def from_lag1(cls, rho: float) -> "NoiseModel":
        """Model whose lag-one autocovariance equals ``rho`` (``0 <= rho < 1``).

        Inverts ``rho(1) = 2**(2H-1) - 1``.
        """
        if not (0.0 <= rho < 1.0):
            raise ValueError(f"lag-one autocovariance must lie in [0, 1), got {rho!r}")
        return cls(0.5 * (math.log2(1.0 + rho) + 1.0))

    def autocovariance(self, lag: int) -> float:
        return autocovariance(self, lag)

    def table(self, n: int) -> np.ndarray:
        return autocovariance_table(self, n)


def autocovariance(model: NoiseModel, lag: int) -> float:
    """rho(k) = (|k+1|^2H + |k-1|^2H - 2|k|^2H) / 2 for ``lag >= 0``."""
    if lag < 0:
        raise ValueError("lag must be nonnegative")
    return float(autocovariance_table(model, lag + 1)[lag])


def autocovariance_table(model: NoiseModel, n: int) -> np.ndarray:
    """rho(0), ..., rho(n-1) as a float array."""
    if n < 1:
        raise ValueError("table length must be at least 1")
    return _table(model.hurst, n).copy()


@lru_cache(maxsize=64)
def _table(hurst: float, n: int) -> np.ndarray:
    k = np.arange(n, dtype=float)
    e = 2.0 * hurst
    rho = 0.5 * (np.abs(k + 1.0) ** e + np.abs(k - 1.0) ** e - 2.0 * k**e)
    rho[0] = 1.0
    if hurst == 0.5:
        rho[1:] = 0.0
    rho.setflags(write=False)
    return rho


def covariance_matrix(model: NoiseModel, n: int) -> np.ndarray:
    """Toeplitz covariance of ``n`` consecutive increments, entry (i, j) = rho(|i-j|)."""
    if n < 1:
        raise ValueError("covariance_matrix needs n >= 1")
    rho = _table(model.hurst, n)
    idx = np.arange(n)
    return rho[np.abs(idx[:, None] - idx[None, :])]


def psd_factor(cov: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower-triangular ``L`` with ``L @ L.T == cov`` and the raw pivots.

    Positive definite input goes straight to LAPACK. Otherwise the clamping
    kernel runs: pivots below 1e-12 are clamped to zero (their column of ``L`` is left
    empty); a pivot below -1e-10 raises :class:`FactorizationError`.
    """
    cov = np.ascontiguousarray(cov, dtype=float)
    try:
        L = np.linalg.cholesky(cov)
        return L, np.diag(L) ** 2
    except np.linalg.LinAlgError:
        pass
    # semidefinite or indefinite: the clamping kernel decides
    L, pivots, bad = kernels.psd_cholesky(cov, kernels.PIVOT_CLAMP, kernels.PIVOT_FAIL)
    if bad >= 0:
        raise FactorizationError(
            f"covariance not positive semidefinite: pivot {bad} = {pivots[bad]:.3e}"
        )
    return L, pivots


@lru_cache(maxsize=32)
def _cached_factor(hurst: float, n: int) -> np.ndarray:
    L, _ = psd_factor(covariance_matrix(NoiseModel(hurst), n))
    L.setflags(write=False)
    return L


def fgn_factor(model: NoiseModel, n: int) -> np.ndarray:
    """Cached Cholesky factor of ``covariance_matrix(model, n)``."""
    return _cached_factor(model.hurst, n)


def sample_fgn(model: NoiseModel, n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw ``n`` consecutive noise increments.

    With ``size`` given, returns ``size`` independent sequences as rows of a
    ``(size, n)`` array. Output depends only on ``rng``'s state.
    """
    if n < 1:
        raise ValueError("sample_fgn needs n >= 1")
    if model.hurst == 0.5:
        return rng.standard_normal(n) if size is None else rng.standard_normal((size, n))
    L = fgn_factor(model, n)
    if size is None:
        return L @ rng.standard_normal(n)
    return rng.standard_normal((size, n)) @ L.T


def derived_rng(base_seed: int, *index: int) -> np.random.Generator:
    """Independent generator for the stream addressed by ``(base_seed, *index)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(base_seed, spawn_key=index)))
