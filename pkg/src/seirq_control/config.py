"""Flat JSON scenario configuration.

Every key is optional; missing keys take the defaults below. A run manifest is
also accepted as a configuration file (its ``config`` entry is used), which is
how runs are reproduced.
"""

from __future__ import annotations

import json
from pathlib import Path

from .model import ModelParams
from .scenarios import (
    COST_SPLIT,
    DEFAULT_BUDGET,
    DEFAULT_STEP,
    DEFAULT_THRESHOLD,
    DELAY_FACTORS,
    HORIZONS,
    MORTALITY,
    TOTAL_POPULATION,
    MortalityRates,
    ScenarioConfig,
    build_initial_state,
)
from .sweep import SweepConfig

DEFAULTS = {
    "horizon": 60.0,
    "delay_factor": 1.0,
    "budget": DEFAULT_BUDGET,
    "cost_split": list(COST_SPLIT),
    "step": DEFAULT_STEP,
    "threshold": DEFAULT_THRESHOLD,
    "mortality": list(MORTALITY),
    "beta_upper": [1.76168, 0.36475, 1.32468, 0.63802, 0.35958, 0.57347],
    "sigma": [0.27300, 0.58232, 0.69339],
    "gamma": [0.06862, 0.03317, 0.35577],
    "tau": 1.0 / 13.0,
    "total_population": TOTAL_POPULATION,
    "damping": 0.5,
    "tolerance": 1e-3,
    "max_iterations": 500,
    "initial_guess": "zeros",
    "adaptive_damping": True,
    "min_damping": 0.01,
    "damping_recovery": 1.25,
    "no_control": False,
    "batch_horizons": list(HORIZONS),
    "batch_delay_factors": list(DELAY_FACTORS),
}

_NUMBER = (int, float)
_TYPES = {
    "cost_split": (list, 3),
    "mortality": (list, 3),
    "beta_upper": (list, 6),
    "sigma": (list, 3),
    "gamma": (list, 3),
}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _check_field(key, value):
    default = DEFAULTS[key]
    if key in _TYPES:
        _, length = _TYPES[key]
        if not isinstance(value, list) or len(value) != length:
            raise ConfigError(key, f"expected a list of {length} numbers")
        if not all(isinstance(v, _NUMBER) and not isinstance(v, bool) for v in value):
            raise ConfigError(key, "entries must be numbers")
        return [float(v) for v in value]
    if key in ("batch_horizons", "batch_delay_factors"):
        if not isinstance(value, list) or not value:
            raise ConfigError(key, "expected a non-empty list of numbers")
        return [float(v) for v in value]
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(key, "expected true or false")
        return value
    if key == "initial_guess":
        if value in ("zeros", "ones"):
            return value
        if isinstance(value, _NUMBER) and not isinstance(value, bool):
            return float(value)
        raise ConfigError(key, 'expected "zeros", "ones" or a number in [0, 1]')
    if key == "max_iterations":
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(key, "expected an integer")
        return value
    if not isinstance(value, _NUMBER) or isinstance(value, bool):
        raise ConfigError(key, "expected a number")
    return float(value)


def resolve(raw: dict) -> dict:
    """Merge ``raw`` over the defaults, validating every key."""
    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration key")
    merged = dict(DEFAULTS)
    for key, value in raw.items():
        merged[key] = _check_field(key, value)
    return merged


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return resolve({})
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"not valid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError("<file>", "top level must be an object")
    if "config" in raw and "scenario" in raw:
        raw = raw["config"]
    return resolve(raw)


def scenario_from_dict(cfg: dict) -> ScenarioConfig:
    """Build a :class:`ScenarioConfig`, mapping validation failures to field names."""
    try:
        params = ModelParams.from_upper_triangle(
            cfg["beta_upper"], cfg["sigma"], cfg["gamma"], cfg["tau"], cfg["total_population"]
        )
    except ValueError as exc:
        raise ConfigError("beta_upper/sigma/gamma/tau/total_population", str(exc)) from exc
    try:
        sweep = SweepConfig(
            damping=cfg["damping"],
            tolerance=cfg["tolerance"],
            max_iterations=cfg["max_iterations"],
            initial_guess=cfg["initial_guess"],
            adaptive=cfg["adaptive_damping"],
            min_damping=cfg["min_damping"],
            recovery=cfg["damping_recovery"],
        )
    except ValueError as exc:
        raise ConfigError("damping/tolerance/max_iterations/initial_guess", str(exc)) from exc
    try:
        mortality = MortalityRates(tuple(cfg["mortality"]))
    except ValueError as exc:
        raise ConfigError("mortality", str(exc)) from exc

    try:
        scenario = ScenarioConfig(
            horizon=cfg["horizon"],
            delay_factor=cfg["delay_factor"],
            budget=cfg["budget"],
            split=tuple(cfg["cost_split"]),
            step=cfg["step"],
            sweep=sweep,
            threshold=cfg["threshold"],
            mortality=mortality,
            params=params,
            no_control=cfg["no_control"],
        )
    except ValueError as exc:
        raise ConfigError(_field_in(str(exc)), str(exc)) from exc
    try:
        scenario.grid
    except ValueError as exc:
        raise ConfigError("step", str(exc)) from exc
    try:
        cost = scenario.cost
    except ValueError as exc:
        raise ConfigError(_field_in(str(exc)), str(exc)) from exc
    if not scenario.no_control and min(cost.group_costs) <= 0:
        raise ConfigError("budget", "budget and every cost_split entry must be positive")
    try:
        build_initial_state(scenario.delay_factor, params.total_population)
    except ValueError as exc:
        raise ConfigError("delay_factor", str(exc)) from exc
    return scenario


def _field_in(message: str) -> str:
    for key, name in (
        ("delay_factor", "delay_factor"),
        ("horizon", "horizon"),
        ("threshold", "threshold"),
        ("total_cost", "budget"),
        ("split", "cost_split"),
    ):
        if key in message:
            return name
    return "<config>"
