"""YAML experiment configuration with a closed, unit-suffixed key schema.

Every physical quantity carries its unit in the key name (``tau_plus_us``,
``pulse_width_ns``); ``si(key, value)`` converts to SI.  A ``null`` value
means "use the module or preset default".
"""

from __future__ import annotations

import copy
from pathlib import Path

import yaml


class ConfigError(ValueError):
    pass


# unit suffix -> SI factor; longest suffix wins
UNITS = {
    "_A_per_m": 1.0, "_J_per_m3": 1.0, "_nm3": 1e-27, "_nm": 1e-9, "_ns": 1e-9, "_ps": 1e-12,
    "_us": 1e-6, "_ms": 1e-3, "_s": 1.0, "_uA": 1e-6, "_A": 1.0, "_uS": 1e-6, "_S": 1.0,
    "_fJ": 1e-15, "_J": 1.0, "_V": 1.0, "_K": 1.0, "_Ohm": 1.0, "_kT": 1.0,
}

SCHEMA = {
    "seed": 0,
    "threads": 0,
    "magnet": {
        "preset": "ima",
        "Ms_A_per_m": None,
        "Ku2_J_per_m3": None,
        "volume_nm3": None,
        "alpha": None,
        "temperature_K": None,
        "polarization": None,
        "dt_ps": None,
    },
    "she": {"theta_sh": None, "width_nm": None, "thickness_nm": None},
    "switching": {
        "current_min_uA": 20.0,
        "current_max_uA": 120.0,
        "n_points": 21,
        "n_trials": 10000,
        "pulse_width_ns": 0.5,
        "thermalize_ns": 5.0,
        "calibrate_target_uA": 71.0,
        "calibrate_n_trials": 4000,
        "calibrate_min_kT": 20.0,
        "calibrate_max_kT": 200.0,
    },
    "device": {
        "track_length_nm": 80.0,
        "cal_current_uA": 10.6,
        "cal_time_ns": 2.0,
        "pair_energy_fJ": 0.1,
        "G_P_uS": 1.0,
        "G_AP_uS": 1.0 / 3.0,
        "V_h_V": 0.5,
    },
    "stdp": {
        "mode": "analog",
        "A_plus": 0.01,
        "A_minus": 0.01,
        "tau_plus_us": 20.0,
        "tau_minus_us": 20.0,
        "p_max": 0.1,
        "t_prog_ns": 1.0,
        "window_span": 5.0,
        "I0_plus_uA": 10.6,
        "I0_minus_uA": 10.6,
        "n_points": 101,
    },
    "stp_ltp": {
        "amplitude_uA": None,
        "calibrate_amplitudes_uA": [175.0, 180.0, 185.0, 190.0, 195.0],
        "calibrate_n_trials": 300,
        "intervals_ns": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
        "n_pulses": 5,
        "pulse_width_ns": 1.0,
        "n_trials": 500,
        "dt_ps": 0.5,
    },
    "network": {
        "n_neurons": 100,
        "timesteps": 50,
        "peak_probability": 0.5,
        "read_voltage_V": 0.1,
        "write_ns": 2.0,
        "read_ns": 0.1,
        "reset_ns": 2.0,
        "A_plus": 0.05,
        "A_minus": 0.0,
        "tau_ns": 200.0,
        "silent_depression": 0.04,
        "probabilistic": False,
        "p_max": 0.1,
        "theta_increment": 0.05,
        "theta_decay_us": 1000.0,
        "inhibition": 1.0,
        "init_high": 0.3,
        "n_train": 5000,
        "n_label": 5000,
        "n_test": 1000,
    },
    "feedforward": {
        "peak_probability": 0.5,
        "crossbar_mode": "ideal",
        "stochastic_center": 0.35,
        "stochastic_slope": 12.0,
        "batch": 100,
    },
    "energy": {
        "dw_write_fJ": 0.05,
        "dw_reset_fJ": 0.05,
        "neuron_write_fJ": 1.0,
        "neuron_reset_fJ": 1.0,
        "stochastic_read_fJ": 0.005,
        "digital_add_fJ": 30.0,
        "step_neuron_fJ": 15.0,
        "baseline_J": None,
        "baseline_note": "",
    },
}


def si(key: str, value):
    """Convert a unit-suffixed config value to SI."""
    if value is None or isinstance(value, (bool, str)):
        return value
    for suffix in sorted(UNITS, key=len, reverse=True):
        if key.endswith(suffix):
            f = UNITS[suffix]
            return [v * f for v in value] if isinstance(value, list) else value * f
    return value


def _check_value(path: str, default, value):
    if value is None:
        return None
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                                  for v in value):
            raise ConfigError(f"{path}: expected a list of numbers, got {value!r}")
        return [float(v) for v in value]
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    # float or nullable-number default
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _merge(schema: dict, doc: dict, prefix: str) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(f"{prefix or 'config'}: expected a mapping, got {type(doc).__name__}")
    out = {}
    for key in doc:
        if key not in schema:
            where = f"{prefix}.{key}" if prefix else str(key)
            raise ConfigError(f"unknown config key '{where}'")
    for key, default in schema.items():
        path = f"{prefix}.{key}" if prefix else key
        if isinstance(default, dict):
            out[key] = _merge(default, doc.get(key) or {}, path)
        elif key in doc:
            out[key] = _check_value(path, default, doc[key])
        else:
            out[key] = copy.deepcopy(default)
    return out


def parse_config(text: str | None = None) -> dict:
    """Full config (defaults filled in) from YAML text; ``None`` gives the defaults."""
    try:
        doc = yaml.safe_load(text) if text else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {str(exc).splitlines()[0]}") from None
    return _merge(SCHEMA, doc or {}, "")


def load_config(path=None) -> dict:
    if path is None:
        return parse_config(None)
    return parse_config(Path(path).read_text())


def dump_config(cfg: dict) -> str:
    return yaml.safe_dump(cfg, sort_keys=False, default_flow_style=None)


def section(cfg: dict, name: str) -> dict:
    """A config section with values converted to SI and unit suffixes kept in the keys."""
    return {k: si(k, v) for k, v in cfg[name].items()}
