"""Scalar system, filter gain and weights.

The system is

    x(k+1) = A(k) x(k) + C(k) y(k) + sigma(k) W1(k)
    y(k+1) = D(k) x(k) + F(k) y(k) + gamma(k) W2(k),   y(0) = 0

and the filter

    z(k+1) = H(k) z(k) + M(k) y(k) + Gamma(k) y(k+1),   z(0) = E x0

with H and M tied to the gain by unbiasedness: H = A - Gamma D, M = C - Gamma F.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .noise import NoiseModel

COEFFICIENTS = ("A", "C", "sigma", "D", "F", "gamma")


class ValidationError(ValueError):
    """Raised with the complete list of problems found in a raw specification."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SystemSpec:
    horizon: int
    A: np.ndarray
    C: np.ndarray
    sigma: np.ndarray
    D: np.ndarray
    F: np.ndarray
    gamma: np.ndarray
    x0_mean: float
    x0_var: float
    noise1: NoiseModel
    noise2: NoiseModel

    def __post_init__(self):
        for name in COEFFICIENTS:
            arr = _frozen(getattr(self, name))
            if arr.shape != (self.horizon,):
                raise ValueError(f"{name} must have length {self.horizon}, got shape {arr.shape}")
            object.__setattr__(self, name, arr)
        if self.x0_var < 0:
            raise ValueError("initial variance negative")

    @property
    def hurst1(self) -> float:
        return self.noise1.hurst

    @property
    def hurst2(self) -> float:
        return self.noise2.hurst

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"horizon": self.horizon}
        for name in COEFFICIENTS:
            out[name] = getattr(self, name).tolist()
        out.update(
            x0_mean=self.x0_mean, x0_var=self.x0_var, hurst1=self.hurst1, hurst2=self.hurst2
        )
        return out


@dataclass(frozen=True, eq=False)
class FilterGain:
    gamma_gain: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.gamma_gain)
        if arr.ndim != 1:
            raise ValueError("gain must be a 1-d sequence")
        object.__setattr__(self, "gamma_gain", arr)

    def __len__(self):
        return self.gamma_gain.shape[0]

    @classmethod
    def zeros(cls, n: int) -> "FilterGain":
        return cls(np.zeros(n))


@dataclass(frozen=True, eq=False)
class DerivedCoefficients:
    h_gamma: np.ndarray
    m_gamma: np.ndarray


@dataclass(frozen=True, eq=False)
class WeightSpec:
    a: np.ndarray = field()

    def __post_init__(self):
        arr = _frozen(self.a)
        if arr.ndim != 1 or arr.shape[0] < 2:
            raise ValueError("weights need length N+1 >= 2")
        if np.any(~np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("weights must be finite and nonnegative")
        if not np.any(arr[1:] > 0):
            raise ValueError("at least one weight a(k), k >= 1, must be positive")
        object.__setattr__(self, "a", arr)

    @property
    def horizon(self) -> int:
        return self.a.shape[0] - 1


def _check_gain(system: SystemSpec, gain: FilterGain):
    if len(gain) != system.horizon:
        raise ValueError(f"gain length {len(gain)} does not match horizon {system.horizon}")


def derive_filter_coefficients(system: SystemSpec, gain: FilterGain) -> DerivedCoefficients:
    """H_Gamma(k) = A(k) - Gamma(k) D(k) and M_Gamma(k) = C(k) - Gamma(k) F(k)."""
    _check_gain(system, gain)
    g = gain.gamma_gain
    return DerivedCoefficients(_frozen(system.A - g * system.D), _frozen(system.C - g * system.F))


def run_filter(system: SystemSpec, gain: FilterGain, y_path, z0: float) -> np.ndarray:
    """Filter output z(0..N) for one observed path y(0..N)."""
    coef = derive_filter_coefficients(system, gain)
    y = np.asarray(y_path, dtype=float)
    n = system.horizon
    if y.shape != (n + 1,):
        raise ValueError(f"observation path must have length {n + 1}, got {y.shape}")
    g = gain.gamma_gain
    z = np.empty(n + 1)
    z[0] = z0
    for k in range(n):
        z[k + 1] = coef.h_gamma[k] * z[k] + coef.m_gamma[k] * y[k] + g[k] * y[k + 1]
    return z


def _as_sequence(name, value, n, errors):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [float(value)] * n
    try:
        arr = [float(v) for v in value]
    except (TypeError, ValueError):
        errors.append(f"{name}: expected a number or a list of numbers")
        return None
    if len(arr) != n:
        errors.append(f"{name}: length {len(arr)} does not match expected length {n}")
        return None
    return arr


def _as_hurst(name, value, errors):
    try:
        h = float(value)
    except (TypeError, ValueError):
        errors.append(f"{name}: expected a number")
        return None
    if math.isnan(h) or not (0.5 <= h < 1.0):
        errors.append(f"{name}: Hurst must lie in [1/2, 1), got {value!r}")
        return None
    return NoiseModel(h)


def validate_system(raw: Mapping[str, Any]) -> SystemSpec:
    """Build a :class:`SystemSpec` from loosely typed fields.

    Scalars are broadcast to length-``horizon`` sequences. Every problem is
    collected before raising, so a single :class:`ValidationError` lists them all.
    """
    errors: list[str] = []
    horizon = raw.get("horizon")
    if horizon is None:
        errors.append("horizon: missing required field")
    elif isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        errors.append(f"horizon: expected an integer >= 1, got {horizon!r}")
        horizon = None

    seqs = {}
    for name in COEFFICIENTS:
        if name not in raw:
            errors.append(f"{name}: missing required field")
        elif horizon is not None:
            seqs[name] = _as_sequence(name, raw[name], horizon, errors)

    x0_mean = raw.get("x0_mean", 0.0)
    x0_var = raw.get("x0_var", 0.0)
    try:
        x0_mean = float(x0_mean)
    except (TypeError, ValueError):
        errors.append("x0_mean: expected a number")
    try:
        x0_var = float(x0_var)
        if x0_var < 0:
            errors.append("x0_var: initial variance negative")
    except (TypeError, ValueError):
        errors.append("x0_var: expected a number")

    noises = {}
    for name in ("hurst1", "hurst2"):
        if name not in raw:
            errors.append(f"{name}: missing required field")
        else:
            noises[name] = _as_hurst(name, raw[name], errors)

    if errors:
        raise ValidationError(errors)
    return SystemSpec(
        horizon=horizon,
        x0_mean=x0_mean,
        x0_var=x0_var,
        noise1=noises["hurst1"],
        noise2=noises["hurst2"],
        **seqs,
    )


def validate_weights(value, horizon: int) -> WeightSpec:
    errors: list[str] = []
    seq = _as_sequence("weights", value, horizon + 1, errors)
    if errors:
        raise ValidationError(errors)
    try:
        return WeightSpec(np.array(seq))
    except ValueError as exc:
        raise ValidationError([f"weights: {exc}"]) from None


def random_system(
    rng: np.random.Generator,
    horizon: int,
    hursts=(0.5, 0.55, 0.7, 0.85),
    coef_range: float = 1.0,
    x0_var: float | None = None,
) -> SystemSpec:
    """Coefficients uniform in ``[-coef_range, coef_range]``, Hurst drawn from ``hursts``."""
    coefs = {name: rng.uniform(-coef_range, coef_range, horizon) for name in COEFFICIENTS}
    return SystemSpec(
        horizon=horizon,
        x0_mean=float(rng.uniform(-1.0, 1.0)),
        x0_var=float(rng.uniform(0.0, 1.0)) if x0_var is None else x0_var,
        noise1=NoiseModel(float(rng.choice(hursts))),
        noise2=NoiseModel(float(rng.choice(hursts))),
        **coefs,
    )
