"""Scenario and sweep configuration.

Configuration files are flat ``key = value`` text. Key names carry their unit
(``p_b_dbm``, ``d_b_km``, ``lambda_b_per_km2``); dimensionless keys have no
suffix. ``#`` starts a comment. Precedence: built-in defaults, then the file,
then command-line overrides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .netmodel import NetworkParams, PathLossProfile, db_to_lin, default_bs_profile, default_ue_profile, lin_to_db

ENGINES = ("analytic", "mc", "both")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


# key -> (NetworkParams field, converter)
_PARAM_KEYS: dict[str, str] = {
    "lambda_b_per_km2": "lambda_b",
    "lambda_u_per_km2": "lambda_u",
    "p_b_dbm": "p_b",
    "p_d_dbm": "p_d",
    "p_0_dbm": "p_0",
    "epsilon": "epsilon",
    "beta_dbm": "beta",
    "gamma_0_db": "gamma_0",
    "rho": "rho",
    "sigma_shadow_bs_db": "sigma_shadow_bs",
    "sigma_shadow_ue_db": "sigma_shadow_ue",
    "noise_bs_dbm": "noise_bs",
    "noise_ue_dbm": "noise_ue",
    "bandwidth_hz": "bandwidth",
    "carrier_freq_hz": "carrier_freq",
    "cu_power_cap_dbm": "cu_power_cap",
}

# single-segment path-loss constants; gains in dB, exponents dimensionless
_PROFILE_KEYS = {
    "a_bl_db": ("bs", "a_los"),
    "alpha_bl": ("bs", "alpha_los"),
    "a_bn_db": ("bs", "a_nlos"),
    "alpha_bn": ("bs", "alpha_nlos"),
    "d_b_km": ("bs", "los_cutoff"),
    "a_dl_db": ("ue", "a_los"),
    "alpha_dl": ("ue", "alpha_los"),
    "a_dn_db": ("ue", "a_nlos"),
    "alpha_dn": ("ue", "alpha_nlos"),
    "d_d_km": ("ue", "los_cutoff"),
    "ref_distance_km": ("both", "ref_distance"),
}

_SWEEP_KEYS = {
    "beta_min_dbm", "beta_max_dbm", "beta_step_db", "gamma_db", "gamma_grid_db", "engine", "reps", "seed",
    "window_km", "workers", "coverage_constraint",
}

_UNIT_SUFFIXES = ("_per_km2", "_dbm", "_db", "_km", "_hz")


@dataclass(frozen=True)
class SweepConfig:
    params: NetworkParams = field(default_factory=NetworkParams)
    beta_min_dbm: float = -70.0
    beta_max_dbm: float = -30.0
    beta_step_db: float = 5.0
    gamma_db: float = 0.0
    gamma_grid_db: tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    engine: str = "analytic"
    reps: int = 10_000
    seed: int = 0
    window_km: float = 5.0
    workers: int | None = None
    coverage_constraint: float = 0.9

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ConfigError(f"engine: must be one of {', '.join(ENGINES)}")
        if self.reps < 1:
            raise ConfigError("reps: must be >= 1")
        if self.beta_step_db <= 0:
            raise ConfigError("beta_step_db: must be positive")
        if self.beta_max_dbm < self.beta_min_dbm:
            raise ConfigError("beta_max_dbm: must be >= beta_min_dbm")
        if not self.gamma_grid_db or list(self.gamma_grid_db) != sorted(self.gamma_grid_db):
            raise ConfigError("gamma_grid_db: must be a non-empty increasing list")
        if self.window_km <= 0:
            raise ConfigError("window_km: must be positive")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers: must be >= 1")
        if not 0 <= self.coverage_constraint <= 1:
            raise ConfigError("coverage_constraint: must lie in [0, 1]")

    @property
    def betas(self) -> np.ndarray:
        n = int(math.floor((self.beta_max_dbm - self.beta_min_dbm) / self.beta_step_db + 1e-9)) + 1
        return self.beta_min_dbm + self.beta_step_db * np.arange(n)

    def as_dict(self) -> dict[str, Any]:
        """Fully resolved configuration under the file key names."""
        p = self.params
        out: dict[str, Any] = {k: getattr(p, f) for k, f in _PARAM_KEYS.items()}
        for key, (which, attr) in _PROFILE_KEYS.items():
            prof = p.ue_profile if which == "ue" else p.bs_profile
            if attr in ("los_cutoff", "ref_distance"):
                out[key] = getattr(prof, attr)
            else:
                if not prof.is_single:
                    out[key] = None
                    continue
                v = getattr(prof.segments[0], attr)
                out[key] = float(lin_to_db(v)) if attr.startswith("a_") else v
        for f in fields(self):
            if f.name != "params":
                v = getattr(self, f.name)
                out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    def echo(self) -> str:
        return "\n".join(f"{k} = {_fmt(v)}" for k, v in self.as_dict().items()) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_float(key: str, raw: str) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    if math.isnan(v):
        raise ConfigError(f"{key}: NaN is not allowed")
    return v


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def parse_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        if not k:
            raise ConfigError(f"line {n}: empty key")
        out[k] = v
    return out


def _known_keys() -> set[str]:
    return set(_PARAM_KEYS) | set(_PROFILE_KEYS) | _SWEEP_KEYS


def _check_key(key: str) -> None:
    if key in _known_keys():
        return
    stems = {k[: -len(s)] for k in _known_keys() for s in _UNIT_SUFFIXES if k.endswith(s)}
    if key in stems:
        raise ConfigError(f"{key}: missing unit suffix (expected one of {', '.join(sorted(k for k in _known_keys() if k.startswith(key + '_')))})")
    raise ConfigError(f"{key}: unknown key")


def _build_profile(base: PathLossProfile, updates: dict[str, float], key_of: dict[str, str]) -> PathLossProfile:
    if not updates:
        return base
    if not base.is_single and set(updates) - {"los_cutoff", "ref_distance"}:
        raise ConfigError(f"{next(iter(key_of.values()))}: only single-segment profiles are configurable from a file")
    seg = base.segments[0]
    kw = dict(a_los=seg.a_los, alpha_los=seg.alpha_los, a_nlos=seg.a_nlos, alpha_nlos=seg.alpha_nlos,
              los_cutoff=base.los_cutoff, ref_distance=base.ref_distance)
    kw.update(updates)
    try:
        return PathLossProfile.single(**kw)
    except ValueError as e:
        raise ConfigError(f"{', '.join(key_of.values())}: {e}") from None


def resolve(values: Mapping[str, str], base: SweepConfig | None = None) -> SweepConfig:
    """Apply string-valued ``values`` on top of ``base`` (defaults if omitted)."""
    base = base or SweepConfig()
    p_kw: dict[str, Any] = {}
    prof_upd: dict[str, dict[str, float]] = {"bs": {}, "ue": {}}
    prof_keys: dict[str, dict[str, str]] = {"bs": {}, "ue": {}}
    s_kw: dict[str, Any] = {}
    for key, raw in values.items():
        _check_key(key)
        if key in _PARAM_KEYS:
            if key == "cu_power_cap_dbm" and raw.lower() in ("none", "off", ""):
                p_kw["cu_power_cap"] = None
            else:
                p_kw[_PARAM_KEYS[key]] = _parse_float(key, raw)
        elif key in _PROFILE_KEYS:
            which, attr = _PROFILE_KEYS[key]
            v = _parse_float(key, raw)
            if attr.startswith("a_"):
                v = float(db_to_lin(v))
            for w in (("bs", "ue") if which == "both" else (which,)):
                prof_upd[w][attr] = v
                prof_keys[w][attr] = key
        elif key == "workers" and raw.lower() in ("none", "auto", ""):
            s_kw[key] = None
        elif key in ("reps", "seed", "workers"):
            s_kw[key] = _parse_int(key, raw)
        elif key == "engine":
            s_kw[key] = raw
        elif key == "gamma_grid_db":
            s_kw[key] = tuple(_parse_float(key, x) for x in raw.split(",") if x.strip())
        else:
            s_kw[key] = _parse_float(key, raw)
    params = base.params
    bs = _build_profile(params.bs_profile, prof_upd["bs"], prof_keys["bs"])
    ue = _build_profile(params.ue_profile, prof_upd["ue"], prof_keys["ue"])
    try:
        params = params.with_(bs_profile=bs, ue_profile=ue, **p_kw)
    except ValueError as e:
        inv = {v: k for k, v in _PARAM_KEYS.items()}
        named = [inv[f] for f in p_kw if f in str(e)] or list(inv[f] for f in p_kw) or ["params"]
        raise ConfigError(f"{named[0]}: {e}") from None
    try:
        return replace(base, params=params, **s_kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> SweepConfig:
    """Defaults, then the file at ``path``, then ``overrides`` (string or typed values)."""
    cfg = SweepConfig()
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config: no such file {str(p)!r}")
        cfg = resolve(parse_text(p.read_text()), cfg)
    if overrides:
        cfg = resolve({k: _fmt(v) if not isinstance(v, str) else v for k, v in overrides.items() if v is not None}, cfg)
    return cfg


def default_profiles() -> tuple[PathLossProfile, PathLossProfile]:
    return default_bs_profile(), default_ue_profile()
