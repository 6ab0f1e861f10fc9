"""Experiment configuration: a flat JSON document validated into ExperimentConfig."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    # state
    family: str = "phi"
    epsilon: float | None = None
    lam: float = 0.0
    theta: float = 0.0
    mixing: str = "approx"
    depolarizing: float = 0.0
    # filter
    t_v: float | None = None
    t_h: float = 1.0
    # tomography
    acquisition_scale: float = 10000.0
    method: str = "linear"
    noise: str = "none"
    seed: int = 0
    # Monte Carlo error bars; 0 disables them
    mc_trials: int = 0
    mc_seed: int | None = None
    # sweeps and process tomography
    tv_list: tuple | None = None
    eps_list: tuple | None = None
    tv_true: float | None = None
    counts_file: str | None = None

    def with_(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


# config-file key -> dataclass attribute
_KEYMAP = {f.name: f.name for f in fields(ExperimentConfig)}
_KEYMAP["lambda"] = "lam"
del _KEYMAP["lam"]
_ATTRMAP = {v: k for k, v in _KEYMAP.items()}

# document order of keys when serializing
KEY_ORDER = [_ATTRMAP[f.name] for f in fields(ExperimentConfig)]

REQUIRED = {
    "simulate": ("epsilon",),
    "qst": ("counts_file",),
    "qpt": ("tv_true",),
    "distill": ("epsilon", "t_v"),
    "sweep-tv": ("epsilon",),
    "sweep-eps": ("t_v", "eps_list"),
    "table1": (),
    None: ("epsilon", "t_v"),
}

_CHOICES = {
    "family": ("phi", "psi"),
    "mixing": ("approx", "exact"),
    "method": ("linear", "mle"),
    "noise": ("none", "poisson"),
}

_UNIT = ("lambda", "depolarizing", "t_v", "t_h", "tv_true")


def _number(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite")
    return float(value)


def _integer(key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    return value


def _check_unit(key: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{key}: value {value} outside [0, 1]")
    return value


def _validate(key: str, value):
    if value is None:
        return None
    if key in _CHOICES:
        if value not in _CHOICES[key]:
            raise ConfigError(f"{key}: must be one of {list(_CHOICES[key])}, got {value!r}")
        return value
    if key in ("seed", "mc_seed"):
        v = _integer(key, value)
        if v < 0:
            raise ConfigError(f"{key}: must be >= 0")
        return v
    if key == "mc_trials":
        v = _integer(key, value)
        if v != 0 and v < 2:
            raise ConfigError(f"{key}: must be 0 (disabled) or >= 2")
        return v
    if key == "counts_file":
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a path string")
        return value
    if key in ("tv_list", "eps_list"):
        if not isinstance(value, list) or not value:
            raise ConfigError(f"{key}: expected a nonempty list")
        out = []
        for i, item in enumerate(value):
            v = _number(f"{key}[{i}]", item)
            if key == "tv_list":
                _check_unit(f"{key}[{i}]", v)
            elif v < 0:
                raise ConfigError(f"{key}[{i}]: must be >= 0")
            out.append(v)
        return tuple(out)
    v = _number(key, value)
    if key in _UNIT:
        return _check_unit(key, v)
    if key == "epsilon" and v < 0:
        raise ConfigError(f"epsilon: must be >= 0, got {v}")
    if key == "acquisition_scale" and v <= 0:
        raise ConfigError(f"acquisition_scale: must be > 0, got {v}")
    return v


def config_from_dict(doc: dict, command: str | None = None) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = sorted(set(doc) - set(_KEYMAP))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    defaults = ExperimentConfig()
    kw = {}
    for key, value in doc.items():
        attr = _KEYMAP[key]
        if value is None and getattr(defaults, attr) is not None:
            raise ConfigError(f"{key}: must not be null")
        kw[attr] = _validate(key, value)
    for key in REQUIRED.get(command, ()):
        if kw.get(_KEYMAP[key]) is None:
            raise ConfigError(f"{key}: required key missing")
    return ExperimentConfig(**kw)


def parse_config(path, command: str | None = None) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    return config_from_dict(doc, command)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = {}
    for key in KEY_ORDER:
        value = getattr(cfg, _KEYMAP[key])
        if isinstance(value, tuple):
            value = list(value)
        out[key] = value
    return out


def derive_seed(seed: int, *path: int) -> np.random.SeedSequence:
    """Deterministic child seed for a named subtask of a run."""
    return np.random.SeedSequence(seed, spawn_key=tuple(path))


def seed_int(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, dtype=np.uint32)[0])
