"""Plain-text ``key = value`` files for simulation configs and calibration plans.

Blank lines and ``#`` comments are ignored. Example::

    grid.width = 100
    grid.height = 100
    agents = 10000
    steps = 1000
    seed = 42
    zone.x0 = 0
    zone.y0 = 0
    zone.x1 = 100
    zone.y1 = 20
"""

from __future__ import annotations

import os
from pathlib import Path

from .observers import ObservationMethod
from .sim import ConfigurationError, GridSpec, SimConfig, Zone

SEED_ENV = "OBS_MABS_SEED"

SIM_KEYS = {"grid.width", "grid.height", "agents", "steps", "seed",
            "zone.x0", "zone.y0", "zone.x1", "zone.y1", "zone.coverage",
            "survey.d", "survey.p"}
PLAN_KEYS = {"n_values", "p_values", "methods", "replicates", "steps", "seed",
             "survey.d", "grid.width", "grid.height"}


def parse_kv(text: str, allowed: set[str] | None = None, source: str = "<string>") -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if allowed is not None and key not in allowed:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def read_kv(path, allowed: set[str] | None = None) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_kv(text, allowed, str(path))


def _int(values: dict, key: str, default=None):
    if key not in values:
        return default
    try:
        return int(values[key])
    except ValueError:
        raise ConfigurationError(f"{key} must be an integer, got {values[key]!r}") from None


def _float(values: dict, key: str, default=None):
    if key not in values:
        return default
    try:
        return float(values[key])
    except ValueError:
        raise ConfigurationError(f"{key} must be a number, got {values[key]!r}") from None


def default_seed() -> int:
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigurationError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def sim_config_from_values(values: dict[str, str]) -> SimConfig:
    grid = GridSpec(_int(values, "grid.width", 100), _int(values, "grid.height", 100))
    rect = [values.get(k) for k in ("zone.x0", "zone.y0", "zone.x1", "zone.y1")]
    if any(v is not None for v in rect):
        if any(v is None for v in rect):
            raise ConfigurationError("zone needs all of zone.x0, zone.y0, zone.x1, zone.y1")
        zone = Zone.rectangle(grid, *(_int(values, k) for k in
                                      ("zone.x0", "zone.y0", "zone.x1", "zone.y1")))
    else:
        zone = Zone.with_coverage(grid, _float(values, "zone.coverage", 0.2))
    seed = _int(values, "seed")
    return SimConfig(grid=grid, zone=zone, agents=_int(values, "agents", 1000),
                     steps=_int(values, "steps", 1000),
                     seed=default_seed() if seed is None else seed)


def load_sim_config(path=None, overrides: dict[str, str] | None = None) -> tuple[SimConfig, dict]:
    """Read a config file (optional), apply overrides, return config and survey extras."""
    values = read_kv(path, SIM_KEYS) if path is not None else {}
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k not in SIM_KEYS:
            raise ConfigurationError(f"unknown override {k!r}")
        values[k] = str(v)
    if "zone.coverage" in (overrides or {}) and (overrides or {}).get("zone.coverage") is not None:
        for k in ("zone.x0", "zone.y0", "zone.x1", "zone.y1"):
            values.pop(k, None)
    extras = {"survey.d": _float(values, "survey.d"), "survey.p": _float(values, "survey.p")}
    return sim_config_from_values(values), extras


def _list(values: dict, key: str, conv):
    if key not in values:
        return None
    try:
        return tuple(conv(v.strip()) for v in values[key].split(",") if v.strip())
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {values[key]!r}") from None


def load_plan(path=None, overrides: dict | None = None):
    from .bench import CalibrationPlan

    values = read_kv(path, PLAN_KEYS) if path is not None else {}
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = str(v)
    kwargs = {}
    n_values = _list(values, "n_values", int)
    p_values = _list(values, "p_values", float)
    methods = _list(values, "methods", ObservationMethod.parse)
    if n_values is not None:
        kwargs["n_values"] = n_values
    if p_values is not None:
        kwargs["p_values"] = p_values
    if methods is not None:
        kwargs["methods"] = methods
    for key in ("replicates", "steps"):
        if key in values:
            kwargs[key] = _int(values, key)
    seed = _int(values, "seed")
    kwargs["seed"] = default_seed() if seed is None else seed
    if "survey.d" in values:
        kwargs["survey_d"] = _float(values, "survey.d")
    kwargs["grid"] = GridSpec(_int(values, "grid.width", 100), _int(values, "grid.height", 100))
    return CalibrationPlan(**kwargs)
