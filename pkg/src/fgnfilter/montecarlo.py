"""Path simulation of (x, y, z, e) and ensemble error statistics.

Path ``i`` draws x0, W1 and W2 from three separate generators addressed by
``(base_seed, i, channel)``, so any single path can be regenerated on its own.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import FilterGain, SystemSpec, derive_filter_coefficients
from .noise import derived_rng, fgn_factor

CHANNEL_X0, CHANNEL_W1, CHANNEL_W2 = 0, 1, 2


@dataclass(frozen=True, eq=False)
class PathResult:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    e: np.ndarray
    e_direct: np.ndarray
    w1: np.ndarray
    w2: np.ndarray


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    n_paths: int
    mean_error: np.ndarray
    empirical_K: np.ndarray
    se_K: np.ndarray
    seed: int


def _draw_normals(system: SystemSpec, base_seed: int, paths) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = system.horizon
    paths = list(paths)
    u0 = np.empty(len(paths))
    u1 = np.empty((len(paths), n))
    u2 = np.empty((len(paths), n))
    for row, i in enumerate(paths):
        u0[row] = derived_rng(base_seed, i, CHANNEL_X0).standard_normal()
        u1[row] = derived_rng(base_seed, i, CHANNEL_W1).standard_normal(n)
        u2[row] = derived_rng(base_seed, i, CHANNEL_W2).standard_normal(n)
    return u0, u1, u2


def _noise_paths(system: SystemSpec, u0, u1, u2):
    n = system.horizon
    x0 = system.x0_mean + np.sqrt(system.x0_var) * u0
    # (n, paths) layout keeps each time slice contiguous for the reductions
    w1 = np.ascontiguousarray(fgn_factor(system.noise1, n) @ u1.T)
    w2 = np.ascontiguousarray(fgn_factor(system.noise2, n) @ u2.T)
    return x0, w1, w2


def _run(system: SystemSpec, gain: FilterGain, x0, w1, w2):
    if len(gain) != system.horizon:
        raise ValueError("gain length does not match horizon")
    return kernels.simulate_paths(
        np.ascontiguousarray(system.A),
        np.ascontiguousarray(system.C),
        np.ascontiguousarray(system.sigma),
        np.ascontiguousarray(system.D),
        np.ascontiguousarray(system.F),
        np.ascontiguousarray(system.gamma),
        np.ascontiguousarray(gain.gamma_gain),
        np.ascontiguousarray(x0, dtype=float),
        w1,
        w2,
        float(system.x0_mean),
    )


def error_recursion(system: SystemSpec, gain: FilterGain, e0, w1, w2) -> np.ndarray:
    """e(k+1) = H_Gamma(k) e(k) + sigma(k) W1(k) - Gamma(k) gamma(k) W2(k)."""
    h = derive_filter_coefficients(system, gain).h_gamma
    g = gain.gamma_gain
    e = np.empty((system.horizon + 1,) + np.shape(e0))
    e[0] = e0
    for k in range(system.horizon):
        e[k + 1] = h[k] * e[k] + system.sigma[k] * w1[k] - g[k] * system.gamma[k] * w2[k]
    return e


def simulate_path(system: SystemSpec, gain: FilterGain, base_seed: int, path_index: int = 0) -> PathResult:
    u0, u1, u2 = _draw_normals(system, base_seed, [path_index])
    x0, w1, w2 = _noise_paths(system, u0, u1, u2)
    x, y, z = _run(system, gain, x0, w1, w2)
    e_direct = error_recursion(system, gain, x0 - system.x0_mean, w1, w2)
    return PathResult(x[:, 0], y[:, 0], z[:, 0], (x - z)[:, 0], e_direct[:, 0], w1[:, 0], w2[:, 0])


def simulate_ensemble(system: SystemSpec, gain: FilterGain, n_paths: int, base_seed: int) -> EnsembleStats:
    """Empirical mean and second moment of the filter error over ``n_paths`` paths."""
    if n_paths < 2:
        raise ValueError("need at least 2 paths")
    u0, u1, u2 = _draw_normals(system, base_seed, range(n_paths))
    x0, w1, w2 = _noise_paths(system, u0, u1, u2)
    x, _, z = _run(system, gain, x0, w1, w2)
    e = x - z
    sq = e * e
    return EnsembleStats(
        n_paths=n_paths,
        mean_error=e.mean(axis=1),
        empirical_K=sq.mean(axis=1),
        se_K=sq.std(axis=1, ddof=1) / np.sqrt(n_paths),
        seed=base_seed,
    )
