"""Human-editable JSON configuration files.

Top-level keys (all optional unless a command requires them):

  "plant":       PlantParams field overrides, e.g. {"nominal_power": 6.0e7}
  "issue_space": IssueSpaceSpec document (see scenario.IssueSpaceSpec.to_json)
  "training":    TrainConfig field overrides plus "hidden_size", "num_layers",
                 "variant" (dt-d only), "window_stride"
  "session":     run_workflow settings: "malfunction" {magnitude_pct, start_s,
                 end_s}, "t_rcmd", "t_checks", "sensor_noise", "noise_seed",
                 "discrepancy_limit", "tau2_grid"/"t_trip_grid" (explicit lists
                 or {"lo", "hi", "count"}), "ramp_duration", "warmup_history",
                 "reward" (RewardSpec overrides), "estimate"
                 {t_acc, t1_end, tau1_end}
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .decision import RewardSpec
from .neural import TrainConfig
from .plant import PlantParams
from .scenario import IssueSpaceSpec
from .session import MalfunctionScenario, SessionConfig
from .strategy import MalfunctionEstimate


class ConfigError(ValueError):
    pass


def load_document(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def _dataclass_from(cls, overrides: dict, what: str):
    valid = {f.name for f in dataclasses.fields(cls)}
    unknown = set(overrides) - valid
    if unknown:
        raise ConfigError(f"unknown {what} keys: {sorted(unknown)}")
    return cls(**overrides)


def plant_params(doc: dict) -> PlantParams:
    return _dataclass_from(PlantParams, doc.get("plant", {}), "plant")


def issue_space(doc: dict) -> IssueSpaceSpec:
    if "issue_space" not in doc:
        raise ConfigError("config lacks an \"issue_space\" section")
    return IssueSpaceSpec.from_json(doc["issue_space"])


def train_config(doc: dict) -> tuple[TrainConfig, dict]:
    """TrainConfig plus the extra net-shape settings."""
    section = dict(doc.get("training", {}))
    extras = {
        "hidden_size": section.pop("hidden_size", 30),
        "num_layers": section.pop("num_layers", 2),
        "variant": section.pop("variant", "rnn"),
        "window_stride": section.pop("window_stride", 1),
    }
    return _dataclass_from(TrainConfig, section, "training"), extras


def _grid(value, default: tuple) -> tuple:
    if value is None:
        return default
    if isinstance(value, dict):
        return tuple(np.linspace(value["lo"], value["hi"], value["count"]))
    return tuple(float(v) for v in value)


def session_config(doc: dict) -> SessionConfig:
    s = doc.get("session", {})
    params = plant_params(doc)
    defaults = SessionConfig(plant_params=params)
    mal = s.get("malfunction", {})
    malfunction = MalfunctionScenario(
        magnitude_pct=mal.get("magnitude_pct", 50.0),
        start_s=mal.get("start_s", 10.0),
        end_s=mal.get("end_s", 60.0))
    estimate = None
    if "estimate" in s:
        e = s["estimate"]
        estimate = MalfunctionEstimate(e["t_acc"], e["t1_end"], e["tau1_end"])
    reward = _dataclass_from(RewardSpec, dict(
        s.get("reward", {}),
        nominal_power=params.nominal_power,
        nominal_torque=params.nominal_torque), "reward")
    return SessionConfig(
        plant_params=params,
        malfunction=malfunction,
        t_rcmd=s.get("t_rcmd", 20.0),
        t_checks=tuple(s.get("t_checks", (100.0, 200.0))),
        horizon=s.get("horizon", 250.0),
        reward_spec=reward,
        discrepancy_limit=s.get("discrepancy_limit", 0.10),
        sensor_noise=s.get("sensor_noise", 0.0),
        noise_seed=s.get("noise_seed", 0),
        warmup_history=s.get("warmup_history", 20.0),
        tau2_grid=_grid(s.get("tau2_grid"), defaults.tau2_grid),
        t_trip_grid=_grid(s.get("t_trip_grid"), defaults.t_trip_grid),
        ramp_duration=s.get("ramp_duration", 50.0),
        estimate=estimate,
        mode=s.get("mode", "auto-accept"),
    )
