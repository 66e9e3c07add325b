"""Experiment configuration: JSON config files, dotted-key overrides, and
assembly of scenarios for the harness and the command line.

Every physical parameter is addressable by a flat key (w_tot_hz, t_sig_s,
bs_rows, channel, frontend, bits, ...).  Overrides accept either the flat key
or a section-dotted spelling such as frontend.bits=3 or channel.mode=single.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .arrays import ArrayGeometry
from .channel import GAIN_MODELS, MultipathParams
from .frontend import FRONTEND_KINDS, FrontendSpec
from .harness import CalibrationSettings, Scenario
from .pss import ConfigError, PssConfig, build_config

CONFIG_DEFAULTS: dict = {
    # sync-signal structure (per-slot dimension n_dim is simulation scale)
    "w_tot_hz": 1e9,
    "w_sig_hz": 1e6,
    "t_sig_s": 1e-4,
    "t_per_s": 5e-3,
    "n_sig": 4,
    "n_slot": 50,
    "n_pss": 3,
    "carrier_hz": 28e9,
    "n_dim": 1024,
    # false-alarm budget inputs
    "r_fa": 0.01,
    "lo_ppm": 1.0,
    "speed_kmh": 30.0,
    # antenna arrays
    "bs_rows": 8,
    "bs_cols": 8,
    "ue_rows": 4,
    "ue_cols": 4,
    "spacing_wl": 0.5,
    # channel
    "channel": "single",
    "cluster_mean": 1.8,
    "spread_deg": 10.0,
    "subpaths": 20,
    "power_decay": 1.0,
    "gain_model": "block",
    # receiver front-end
    "frontend": "digital",
    "bits": 3,
    "n_streams": 4,
    "p_fm_fj": 59.4,
    "agc_backoff_db": 0.0,
    # transmit policy
    "tx_mode": "omni",
    # experiment execution
    "snr_db": list(range(-30, 1, 2)),
    "trials": 2000,
    "seed": 1,
    "threads": 1,
    "calib_trials": 30000,
    "calib_seed": 1234,
    "rate_target_bps": 1e7,
    "beta_overhead": 0.4,
    "scenarios": None,          # optional list of per-scenario override dicts
}

_SIGNAL_KEY_MAP = {
    "w_tot_hz": "w_tot", "w_sig_hz": "w_sig", "t_sig_s": "t_sig", "t_per_s": "t_per",
    "n_sig": "n_sig", "n_slot": "n_slot", "n_pss": "n_pss", "carrier_hz": "carrier_hz",
    "n_dim": "n_dim", "r_fa": "r_fa", "lo_ppm": "lo_ppm", "speed_kmh": "speed_kmh",
}

#: dotted spellings accepted by --override in addition to the flat keys
_ALIASES = {
    "frontend.kind": "frontend",
    "channel.mode": "channel",
    "tx.mode": "tx_mode",
}


def parse_override(text: str) -> tuple[str, object]:
    """'key=value' with JSON-style values; bare words stay strings."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    if key in _ALIASES:
        key = _ALIASES[key]
    elif key not in CONFIG_DEFAULTS and "." in key:
        tail = key.rsplit(".", 1)[1]
        if tail in CONFIG_DEFAULTS:
            key = tail
    if key not in CONFIG_DEFAULTS:
        raise ConfigError(f"unknown config key {key!r} in override")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw.strip()
    return key, value


def load_config(path: str | Path | None = None,
                overrides: list[str] | None = None) -> dict:
    """Defaults, then the config file, then overrides; validates keys."""
    params = dict(CONFIG_DEFAULTS)
    explicit: set[str] = set()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
        unknown = set(loaded) - set(CONFIG_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys in {path}: {sorted(unknown)}")
        params.update(loaded)
        explicit |= set(loaded)
    applied = []
    for text in overrides or []:
        key, value = parse_override(text)
        params[key] = value
        applied.append({key: value})
        explicit.add(key)
    params["_overrides"] = applied
    params["_explicit"] = explicit
    validate_config(params)
    return params


def validate_config(params: dict) -> None:
    if params["channel"] not in ("single", "multipath"):
        raise ConfigError(f"channel must be single or multipath, got {params['channel']!r}")
    if params["frontend"] not in FRONTEND_KINDS:
        raise ConfigError(f"frontend must be one of {FRONTEND_KINDS}")
    if params["tx_mode"] not in ("omni", "random"):
        raise ConfigError("tx_mode must be omni or random")
    if params["gain_model"] not in GAIN_MODELS:
        raise ConfigError(f"gain_model must be one of {GAIN_MODELS}")
    if params["trials"] < 1:
        raise ConfigError("trials must be positive")
    # signal-level consistency checks live in build_config
    signal_config(params)


def signal_config(params: dict) -> PssConfig:
    return build_config({dst: params[src] for src, dst in _SIGNAL_KEY_MAP.items()})


def scenario_from(params: dict) -> Scenario:
    cfg = signal_config(params)
    bs = ArrayGeometry(int(params["bs_rows"]), int(params["bs_cols"]),
                       float(params["spacing_wl"]))
    ue = ArrayGeometry(int(params["ue_rows"]), int(params["ue_cols"]),
                       float(params["spacing_wl"]))
    fe = FrontendSpec(kind=params["frontend"], bits=int(params["bits"]),
                      n_streams=int(params["n_streams"]),
                      p_fm_fj=float(params["p_fm_fj"]),
                      agc_backoff_db=float(params["agc_backoff_db"]))
    mp = MultipathParams(cluster_mean=float(params["cluster_mean"]),
                         power_decay=float(params["power_decay"]),
                         spread_deg=float(params["spread_deg"]),
                         subpaths=int(params["subpaths"]))
    return Scenario(cfg=cfg, bs=bs, ue=ue, frontend=fe, tx_mode=params["tx_mode"],
                    channel_mode=params["channel"], multipath=mp,
                    gain_model=params["gain_model"])


def scenarios_from(params: dict) -> list[Scenario]:
    """The top-level scenario, or one per entry of the 'scenarios' list (each
    entry is a dict of flat-key overrides on top of the base parameters)."""
    entries = params.get("scenarios")
    if not entries:
        return [scenario_from(params)]
    out = []
    for entry in entries:
        unknown = set(entry) - set(CONFIG_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown keys in scenario entry: {sorted(unknown)}")
        merged = {**params, **entry}
        out.append(scenario_from(merged))
    return out


def calibration_settings(params: dict, directory: str | None = None) -> CalibrationSettings:
    return CalibrationSettings(n_trials=int(params["calib_trials"]),
                               seed=int(params["calib_seed"]), directory=directory)
