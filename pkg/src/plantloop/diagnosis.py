"""Diagnosis twin: infer unobservable safety factors from sensor histories.

Maps measurable plena temperatures to the peak fuel centerline and peak
cladding temperatures, either pointwise (feedforward variant) or over sensor
windows (recurrent variant).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .analytics import mse as mse_metric, rmse as rmse_metric
from .neural import (FeedforwardNet, GRUNet, Normalizer, TrainConfig, train,
                     net_to_json, net_from_json, save_payload, load_payload)
from .plant import SensorFrame
from .scenario import Database, split_database

DEFAULT_INPUTS = ("lp_plenum_temp", "hp_plenum_temp", "upper_plenum_temp")
SSF_OUTPUTS = ("pfcl_temp", "peak_clad_temp")


class DiagnosisInputError(ValueError):
    pass


class WindowTooShort(DiagnosisInputError):
    pass


class MissingFeature(DiagnosisInputError):
    pass


@dataclass
class EvaluationRecord:
    mse_per_output: dict
    rmse_per_output: dict
    overall_mse: float
    overall_rmse: float

    def to_json(self) -> dict:
        return {"mse_per_output": self.mse_per_output,
                "rmse_per_output": self.rmse_per_output,
                "overall_mse": self.overall_mse,
                "overall_rmse": self.overall_rmse}

    @staticmethod
    def from_json(d: dict) -> "EvaluationRecord":
        return EvaluationRecord(d["mse_per_output"], d["rmse_per_output"],
                                d["overall_mse"], d["overall_rmse"])


@dataclass
class DiagnosisModel:
    net: object                       # FeedforwardNet | GRUNet
    variant: str                      # "fnn" | "rnn"
    input_features: tuple
    output_features: tuple
    in_norm: Normalizer
    out_norm: Normalizer
    config: TrainConfig
    db_fingerprint: str
    evaluation: EvaluationRecord | None = None

    @property
    def sequence_length(self) -> int:
        return self.config.sequence_length if self.variant == "rnn" else 1

    def save(self, path: str | Path) -> None:
        save_payload(path, "diagnosis", {
            "variant": self.variant,
            "input_features": list(self.input_features),
            "output_features": list(self.output_features),
            "net": net_to_json(self.net),
            "in_norm": self.in_norm.to_json(),
            "out_norm": self.out_norm.to_json(),
            "config": self.config.to_json(),
            "db_fingerprint": self.db_fingerprint,
            "evaluation": self.evaluation.to_json() if self.evaluation else None,
        })

    @staticmethod
    def load(path: str | Path) -> "DiagnosisModel":
        d = load_payload(path, "diagnosis")
        ev = EvaluationRecord.from_json(d["evaluation"]) if d.get("evaluation") else None
        return DiagnosisModel(
            net=net_from_json(d["net"]), variant=d["variant"],
            input_features=tuple(d["input_features"]),
            output_features=tuple(d["output_features"]),
            in_norm=Normalizer.from_json(d["in_norm"]),
            out_norm=Normalizer.from_json(d["out_norm"]),
            config=TrainConfig.from_json(d["config"]),
            db_fingerprint=d["db_fingerprint"], evaluation=ev)


def _window_tensor(x: np.ndarray, y: np.ndarray, seq_len: int, stride: int = 1):
    """Slide length-L windows over each transient: (N, T, F) -> (M, L, F)."""
    n, t, _ = x.shape
    if t < seq_len:
        raise WindowTooShort(f"transients of {t} steps cannot host {seq_len}-windows")
    starts = range(0, t - seq_len + 1, stride)
    xw = np.concatenate([x[:, s:s + seq_len] for s in starts], axis=0)
    yw = np.concatenate([y[:, s:s + seq_len] for s in starts], axis=0)
    return xw, yw


def _check_columns(db: Database, names: Sequence[str]) -> None:
    have = set(db.transients[0].columns)
    missing = [n for n in names if n not in have]
    if missing:
        raise MissingFeature(f"database lacks columns: {missing}")


def build_datasets(db_splits, input_features, output_features, variant: str,
                   seq_len: int, window_stride: int = 1):
    """Normalized (x, y) pairs per split plus the fitted normalizers."""
    train_db, val_db, test_db = db_splits
    for db in db_splits:
        _check_columns(db, tuple(input_features) + tuple(output_features))
    xs = [db.feature_matrix(input_features) for db in db_splits]
    ys = [db.feature_matrix(output_features) for db in db_splits]
    in_norm = Normalizer.fit(xs[0], list(input_features))
    out_norm = Normalizer.fit(ys[0], list(output_features))
    out = []
    for x, y in zip(xs, ys):
        xn, yn = in_norm.transform(x), out_norm.transform(y)
        if variant == "rnn":
            out.append(_window_tensor(xn, yn, seq_len, window_stride))
        else:
            out.append((xn.reshape(-1, xn.shape[-1]), yn.reshape(-1, yn.shape[-1])))
    return out, in_norm, out_norm


def train_dtd(database: Database, config: TrainConfig | None = None,
              variant: str = "rnn", input_features=DEFAULT_INPUTS,
              hidden_size: int = 30, num_layers: int = 2,
              split_seed: int = 0, window_stride: int = 1,
              splits=None) -> DiagnosisModel:
    """Train a diagnosis model on a scenario database.

    The database is split 80/10/10 by whole transients unless ``splits`` is
    given. Training statistics come from the training split only.
    """
    config = config or TrainConfig(sequence_length=5, batch_size=100,
                                   learning_rate=0.02, epochs_max=60,
                                   validation_patience=8, early_stop_patience=20)
    if variant not in ("fnn", "rnn"):
        raise ValueError("variant must be 'fnn' or 'rnn'")
    db_splits = splits or split_database(database, seed=split_seed)
    datasets, in_norm, out_norm = build_datasets(
        db_splits, input_features, SSF_OUTPUTS, variant,
        config.sequence_length, window_stride)
    n_in, n_out = len(input_features), len(SSF_OUTPUTS)
    if variant == "rnn":
        net = GRUNet(n_in, hidden_size, n_out, num_layers=num_layers,
                     seed=config.seed)
    else:
        net = FeedforwardNet([n_in] + [hidden_size] * num_layers + [n_out],
                             seed=config.seed)
    train(net, datasets[0], datasets[1], datasets[2], config)
    model = DiagnosisModel(net=net, variant=variant,
                           input_features=tuple(input_features),
                           output_features=SSF_OUTPUTS, in_norm=in_norm,
                           out_norm=out_norm, config=config,
                           db_fingerprint=database.provenance.get("plant_params_hash", ""))
    model.evaluation = evaluate_dtd(model, db_splits[2])
    return model


def _frames_to_matrix(frames: Sequence[SensorFrame], features) -> np.ndarray:
    rows = []
    for f in frames:
        try:
            rows.append([f.readings[name] for name in features])
        except KeyError as exc:
            raise MissingFeature(f"sensor frame lacks {exc.args[0]!r}") from exc
    return np.asarray(rows, dtype=float)


def infer_ssf(model: DiagnosisModel, frames: Sequence[SensorFrame]) -> np.ndarray:
    """Safety-factor estimates for each frame time; (n_frames, n_outputs)."""
    if len(frames) == 0:
        raise WindowTooShort("empty sensor window")
    if model.variant == "rnn" and len(frames) < model.sequence_length:
        raise WindowTooShort(
            f"window of {len(frames)} frames is shorter than the model "
            f"sequence length {model.sequence_length}")
    x = _frames_to_matrix(frames, model.input_features)
    return infer_from_matrix(model, x)


def infer_from_matrix(model: DiagnosisModel, x: np.ndarray) -> np.ndarray:
    """Estimates from a raw (n_times, n_inputs) measurement matrix."""
    if x.shape[1] != len(model.input_features):
        raise MissingFeature(
            f"expected {len(model.input_features)} input columns, got {x.shape[1]}")
    xn = model.in_norm.transform(x)
    if model.variant == "rnn":
        out, _ = model.net.forward(xn[None, :, :])
        yn = out[0]
    else:
        yn = model.net.forward(xn)
    return model.out_norm.inverse(yn)


class DiagnosisStream:
    """Stateful per-second inference for live monitoring."""

    def __init__(self, model: DiagnosisModel):
        self.model = model
        self._state = (model.net.zero_state(1) if model.variant == "rnn" else None)

    def push(self, frame: SensorFrame) -> np.ndarray:
        x = _frames_to_matrix([frame], self.model.input_features)
        xn = self.model.in_norm.transform(x)
        if self.model.variant == "rnn":
            out, self._state = self.model.net.step(xn, self._state)
        else:
            out = self.model.net.forward(xn)
        return self.model.out_norm.inverse(out)[0]


def evaluate_dtd(model: DiagnosisModel, database: Database,
                 noise_fraction: float | dict | None = None,
                 seed: int = 0) -> EvaluationRecord:
    """Prediction error over a database, optionally with sensor noise.

    ``noise_fraction`` may be a single fraction applied to every input or a
    mapping of input feature -> fraction (absent features get no noise).
    """
    _check_columns(database, model.input_features + model.output_features)
    x = database.feature_matrix(model.input_features)
    y = database.feature_matrix(model.output_features)
    if noise_fraction:
        rng = np.random.default_rng(seed)
        x = x.copy()
        for j, name in enumerate(model.input_features):
            c = (noise_fraction.get(name, 0.0) if isinstance(noise_fraction, dict)
                 else noise_fraction)
            if c > 0:
                x[:, :, j] += rng.normal(0.0, c * np.abs(x[:, :, j]))
    preds = np.stack([infer_from_matrix(model, x[i]) for i in range(len(x))])
    per_mse, per_rmse = {}, {}
    for j, name in enumerate(model.output_features):
        per_mse[name] = mse_metric(preds[:, :, j], y[:, :, j])
        per_rmse[name] = rmse_metric(preds[:, :, j], y[:, :, j])
    return EvaluationRecord(per_mse, per_rmse,
                            overall_mse=mse_metric(preds, y),
                            overall_rmse=rmse_metric(preds, y))


def noise_study(model: DiagnosisModel, database: Database, c: float = 0.001,
                seed: int = 0) -> dict:
    """Per-input noise rows: noise applied to one input at a time."""
    rows = {}
    for name in model.input_features:
        rows[name] = evaluate_dtd(model, database, {name: c}, seed=seed)
    return rows
