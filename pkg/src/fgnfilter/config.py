"""Run configuration: a single JSON document.

Minimal example::

    {"horizon": 4, "hurst1": 0.75, "hurst2": 0.6,
     "A": 0.9, "C": 0.1, "sigma": 1.0, "D": 1.0, "F": 0.0, "gamma": 0.5,
     "weights": 1.0}

Scalars broadcast to sequences. Optional fields and their defaults: ``x0_mean``
0, ``x0_var`` 0, ``gain`` all zeros, ``seed`` 0, ``paths`` 10000, and an
``optimizer`` object with the fields of
:class:`fgnfilter.optimizer.OptimizerOptions`. A previously emitted JSON report
is accepted as well; its embedded ``config`` object is used.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .model import FilterGain, SystemSpec, ValidationError, WeightSpec, validate_system, validate_weights
from .optimizer import OptimizerOptions

DEFAULT_PATHS = 10_000
_SYSTEM_KEYS = {"horizon", "A", "C", "sigma", "D", "F", "gamma", "x0_mean", "x0_var", "hurst1", "hurst2"}
_TOP_KEYS = _SYSTEM_KEYS | {"weights", "optimizer", "seed", "paths", "gain"}


@dataclass(frozen=True, eq=False)
class RunConfig:
    system: SystemSpec
    weights: WeightSpec
    optimizer: OptimizerOptions
    seed: int
    paths: int
    gain: FilterGain

    def to_dict(self) -> dict[str, Any]:
        out = self.system.to_dict()
        out["weights"] = self.weights.a.tolist()
        out["gain"] = self.gain.gamma_gain.tolist()
        out["optimizer"] = self.optimizer.to_dict()
        out["seed"] = self.seed
        out["paths"] = self.paths
        return out

    def with_overrides(self, **changes) -> "RunConfig":
        """Copy with top-level or optimizer fields replaced; ``None`` values are ignored."""
        changes = {k: v for k, v in changes.items() if v is not None}
        raw = self.to_dict()
        opt = raw.pop("optimizer")
        for key, val in changes.items():
            # seed lives at both levels; the optimizer copy follows the top one
            if key in opt:
                opt[key] = val
            if key not in opt or key == "seed":
                raw[key] = val
        raw["optimizer"] = opt
        return config_from_dict(raw)


def _int_field(raw, key, default, minimum, errors):
    val = raw.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int) or val < minimum:
        errors.append(f"{key}: expected an integer >= {minimum}, got {val!r}")
        return default
    return val


def config_from_dict(raw: Mapping[str, Any]) -> RunConfig:
    """Validate every section and raise one :class:`ValidationError` listing all problems."""
    if not isinstance(raw, Mapping):
        raise ValidationError(["config: top level must be an object"])
    if "config" in raw and isinstance(raw["config"], Mapping):
        raw = raw["config"]
    errors: list[str] = [f"{key}: unknown field" for key in raw if key not in _TOP_KEYS]

    system = None
    try:
        system = validate_system(raw)
    except ValidationError as exc:
        errors.extend(exc.errors)

    weights = None
    if "weights" not in raw:
        errors.append("weights: missing required field")
    elif system is not None:
        try:
            weights = validate_weights(raw["weights"], system.horizon)
        except ValidationError as exc:
            errors.extend(exc.errors)

    seed = _int_field(raw, "seed", 0, 0, errors)
    paths = _int_field(raw, "paths", DEFAULT_PATHS, 2, errors)

    opt_raw = dict(raw.get("optimizer") or {})
    known = {f.name for f in fields(OptimizerOptions)}
    for key in sorted(set(opt_raw) - known):
        errors.append(f"optimizer.{key}: unknown field")
        opt_raw.pop(key)
    opt_raw.setdefault("seed", seed)
    optimizer = None
    try:
        optimizer = OptimizerOptions(**opt_raw)
    except (ValueError, TypeError) as exc:
        errors.append(f"optimizer: {exc}")

    gain = None
    if system is not None:
        g = raw.get("gain", 0.0)
        if isinstance(g, (int, float)) and not isinstance(g, bool):
            g = [float(g)] * system.horizon
        try:
            arr = np.asarray(g, dtype=float)
            if arr.shape != (system.horizon,):
                errors.append(f"gain: length {arr.size} does not match expected length {system.horizon}")
            else:
                gain = FilterGain(arr)
        except (TypeError, ValueError):
            errors.append("gain: expected a number or a list of numbers")

    if errors:
        raise ValidationError(errors)
    return RunConfig(system, weights, optimizer, seed, paths, gain)


class ConfigParseError(ValidationError):
    pass


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError([f"{path}: cannot read config ({exc.strerror or exc})"]) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError([f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}"]) from None
    return config_from_dict(raw)
