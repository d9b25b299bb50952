"""Prognosis twin: closed-loop multistep prediction of plant transients.

A recurrent net is trained one step ahead with teacher forcing on
(state, action) rows; at inference the hidden state is warmed over measured
history, then predictions are fed back recursively while the action channels
follow each candidate torque schedule. All candidates share the warm state.

The readout is parameterized as the normalized one-step state change; the
predicted next state is the current state plus the denormalized change, which
keeps long recursions anchored. History still matters twofold: the warm
hidden state carries the latent plant modes, and with no history at all there
is no measured current state to anchor to, so prediction must start from the
training prior and errors grow sharply.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .analytics import rmse as rmse_metric
from .diagnosis import (EvaluationRecord, MissingFeature, WindowTooShort,
                        _check_columns)
from .neural import (GRUNet, Normalizer, TrainConfig, train, net_to_json,
                     net_from_json, save_payload, load_payload)
from .scenario import Database, split_database
from .strategy import TorqueSchedule

STATE_FEATURES = ("pfcl_temp", "core_power", "core_outlet_flow", "ihx_power",
                  "peak_clad_temp")
ACTION_FEATURES = ("pump_torque_1", "pump_torque_2")


class ScheduleGap(ValueError):
    pass


@dataclass
class HistoryBuffer:
    """Time-ordered (state, action) records at uniform cadence.

    An empty buffer (no records at all) is allowed but degraded: predictions
    then lack both a warm hidden state and a measured current state, and must
    start from the training prior.
    """

    times: np.ndarray          # (n,)
    states: np.ndarray         # (n, n_state_features), raw units
    actions: np.ndarray        # (n, n_action_features), raw units
    reference_time: float | None = None   # required when empty

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        self.actions = np.asarray(self.actions, dtype=float)
        if len(self.times) > 0:
            self.states = np.atleast_2d(self.states)
            self.actions = np.atleast_2d(self.actions)
        if len(self.times) != len(self.states) or len(self.times) != len(self.actions):
            raise ValueError("history arrays must share their length")
        if len(self.times) == 0 and self.reference_time is None:
            raise ValueError("an empty history needs a reference_time")
        if len(self.times) > 1:
            steps = np.diff(self.times)
            if np.any(steps <= 0) or np.ptp(steps) > 1e-9:
                raise ValueError("history must be strictly increasing and uniform")

    @staticmethod
    def empty(reference_time: float, n_state: int = 5, n_action: int = 2) -> "HistoryBuffer":
        return HistoryBuffer(times=np.zeros(0),
                             states=np.zeros((0, n_state)),
                             actions=np.zeros((0, n_action)),
                             reference_time=reference_time)

    @property
    def degraded(self) -> bool:
        return len(self.times) == 0

    @property
    def cadence(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 1.0

    @property
    def t_current(self) -> float:
        if self.degraded:
            return float(self.reference_time)
        return float(self.times[-1])


@dataclass
class PrognosisModel:
    net: GRUNet
    state_features: tuple
    action_features: tuple
    in_norm: Normalizer        # over state+action columns
    delta_norm: Normalizer     # over one-step state changes
    config: TrainConfig
    db_fingerprint: str
    evaluation: EvaluationRecord | None = None

    @property
    def n_state(self) -> int:
        return len(self.state_features)

    def save(self, path: str | Path) -> None:
        save_payload(path, "prognosis", {
            "state_features": list(self.state_features),
            "action_features": list(self.action_features),
            "net": net_to_json(self.net),
            "in_norm": self.in_norm.to_json(),
            "delta_norm": self.delta_norm.to_json(),
            "config": self.config.to_json(),
            "db_fingerprint": self.db_fingerprint,
            "evaluation": self.evaluation.to_json() if self.evaluation else None,
        })

    @staticmethod
    def load(path: str | Path) -> "PrognosisModel":
        d = load_payload(path, "prognosis")
        ev = EvaluationRecord.from_json(d["evaluation"]) if d.get("evaluation") else None
        return PrognosisModel(
            net=net_from_json(d["net"]),
            state_features=tuple(d["state_features"]),
            action_features=tuple(d["action_features"]),
            in_norm=Normalizer.from_json(d["in_norm"]),
            delta_norm=Normalizer.from_json(d["delta_norm"]),
            config=TrainConfig.from_json(d["config"]),
            db_fingerprint=d["db_fingerprint"], evaluation=ev)


def _one_step_windows(x_state_n: np.ndarray, x_act_n: np.ndarray,
                      delta_n: np.ndarray, seq_len: int, stride: int = 1):
    """Teacher-forced windows: inputs [state(t), action(t)], target = the
    normalized state change state(t+1) - state(t)."""
    n, t, _ = x_state_n.shape
    if t < seq_len + 1:
        raise WindowTooShort(f"transients of {t} steps cannot host {seq_len}+1 windows")
    inp = np.concatenate([x_state_n, x_act_n], axis=2)
    starts = range(0, t - seq_len, stride)
    xw = np.concatenate([inp[:, s:s + seq_len] for s in starts], axis=0)
    yw = np.concatenate([delta_n[:, s:s + seq_len] for s in starts], axis=0)
    return xw, yw


def train_dtp(database: Database, config: TrainConfig | None = None,
              hidden_size: int = 30, num_layers: int = 2,
              state_features=STATE_FEATURES, action_features=ACTION_FEATURES,
              split_seed: int = 0, window_stride: int = 1,
              splits=None) -> PrognosisModel:
    """Train the one-step-ahead predictor with teacher forcing."""
    config = config or TrainConfig(sequence_length=14, batch_size=512,
                                   learning_rate=0.001, epochs_max=120,
                                   validation_patience=40, early_stop_patience=40,
                                   l2_weight=0.0)
    db_splits = splits or split_database(database, seed=split_seed)
    for db in db_splits:
        _check_columns(db, tuple(state_features) + tuple(action_features))
    state_mats = [db.feature_matrix(state_features) for db in db_splits]
    act_mats = [db.feature_matrix(action_features) for db in db_splits]
    state_norm = Normalizer.fit(state_mats[0], list(state_features))
    act_norm = Normalizer.fit(act_mats[0], list(action_features))
    in_norm = Normalizer(np.concatenate([state_norm.mean, act_norm.mean]),
                         np.concatenate([state_norm.std, act_norm.std]),
                         list(state_features) + list(action_features))
    train_deltas = state_mats[0][:, 1:, :] - state_mats[0][:, :-1, :]
    flat = train_deltas.reshape(-1, len(state_features))
    delta_norm = Normalizer(flat.mean(axis=0), flat.std(axis=0),
                            list(state_features))
    datasets = []
    for xs, xa in zip(state_mats, act_mats):
        deltas = delta_norm.transform(xs[:, 1:, :] - xs[:, :-1, :])
        datasets.append(_one_step_windows(
            state_norm.transform(xs)[:, :-1, :],
            act_norm.transform(xa)[:, :-1, :],
            deltas, config.sequence_length, window_stride))
    net = GRUNet(len(state_features) + len(action_features), hidden_size,
                 len(state_features), num_layers=num_layers, seed=config.seed)
    train(net, datasets[0], datasets[1], datasets[2], config)
    model = PrognosisModel(net=net, state_features=tuple(state_features),
                           action_features=tuple(action_features),
                           in_norm=in_norm, delta_norm=delta_norm, config=config,
                           db_fingerprint=database.provenance.get("plant_params_hash", ""))
    model.evaluation = _one_step_eval(model, datasets[2])
    return model


def _one_step_eval(model: PrognosisModel, test_data) -> EvaluationRecord:
    """Next-state error; with the delta readout the true current state
    cancels, so this is the delta error in raw units."""
    x, y = test_data
    out, _ = model.net.forward(x)
    err_raw = (out - y) * model.delta_norm.std
    per_mse, per_rmse = {}, {}
    for j, name in enumerate(model.state_features):
        per_mse[name] = float(np.mean(err_raw[:, :, j] ** 2))
        per_rmse[name] = float(np.sqrt(per_mse[name]))
    overall = float(np.mean(err_raw ** 2))
    return EvaluationRecord(per_mse, per_rmse, overall, float(np.sqrt(overall)))


def warm_state(model: PrognosisModel, history: HistoryBuffer) -> np.ndarray:
    """Hidden state after consuming all history rows before the current one."""
    n_h = len(history.times)
    state = model.net.zero_state(1)
    if n_h > 1:
        inp = np.concatenate([history.states[:-1], history.actions[:-1]], axis=1)
        inp_n = model.in_norm.transform(inp)
        _, state = model.net.forward(inp_n[None, :, :], state)
    return state


def closed_loop(model: PrognosisModel, state0: np.ndarray, x0: np.ndarray,
                action_series: np.ndarray, return_state: bool = False):
    """Recursive prediction. state0: (layers, B, H); x0: (B, n_state) raw;
    action_series: (B, T, n_act) raw. Returns (B, T, n_state) predictions for
    the T steps after the current time."""
    b, t_steps, _ = action_series.shape
    n_s = model.n_state
    state = state0
    x = np.array(x0, dtype=float)
    state_mean = model.in_norm.mean[:n_s]
    state_std = model.in_norm.std[:n_s]
    act_mean = model.in_norm.mean[n_s:]
    act_std = model.in_norm.std[n_s:]
    preds = np.empty((b, t_steps, n_s))
    for t in range(t_steps):
        x_n = (x - state_mean) / state_std
        a_n = (action_series[:, t] - act_mean) / act_std
        y, state = model.net.step(np.concatenate([x_n, a_n], axis=1), state)
        x = x + model.delta_norm.inverse(y)
        preds[:, t] = x
    if return_state:
        return preds, state, x
    return preds


def predict_multistep(model: PrognosisModel, history: HistoryBuffer,
                      schedules: Sequence[TorqueSchedule], horizon: float,
                      cadence: float | None = None) -> list[dict]:
    """Front-run every candidate schedule from the shared warm state.

    Returns one record per candidate with times covering
    [t_current, t_current + horizon] and the first row equal to the supplied
    current state.
    """
    cadence = cadence or history.cadence
    t_r = history.t_current
    n_steps = int(round(horizon / cadence))
    for sch in schedules:
        if sch.horizon < t_r + horizon - 1e-9:
            raise ScheduleGap(
                f"schedule covers up to {sch.horizon}s but prediction needs "
                f"{t_r + horizon}s")
    state1 = warm_state(model, history)
    b = len(schedules)
    state = np.repeat(state1, b, axis=1)
    if history.degraded:
        # no measured current state: seed from the training prior
        seed = model.in_norm.mean[:model.n_state]
    else:
        seed = history.states[-1]
    x0 = np.repeat(seed[None, :], b, axis=0)
    step_times = t_r + cadence * np.arange(n_steps)
    actions = np.empty((b, n_steps, len(model.action_features)))
    for i, sch in enumerate(schedules):
        actions[i, :, 0] = sch.pump1.sample(step_times)
        actions[i, :, 1] = sch.pump2.sample(step_times)
    preds = closed_loop(model, state, x0, actions)
    results = []
    times = t_r + cadence * np.arange(n_steps + 1)
    for i in range(b):
        series = np.vstack([seed[None, :], preds[i]])
        results.append({"times": times, "degraded": history.degraded,
                        "values": {name: series[:, j]
                                   for j, name in enumerate(model.state_features)}})
    return results


def _true_history(db_tr, model: PrognosisModel, t_start: float, t_end: float) -> HistoryBuffer:
    t = db_tr.time
    sel = (t >= t_start - 1e-9) & (t <= t_end + 1e-9)
    return HistoryBuffer(
        times=t[sel],
        states=db_tr.column_matrix(model.state_features)[sel],
        actions=db_tr.column_matrix(model.action_features)[sel])


def replay_closed_loop(model: PrognosisModel, database: Database,
                       t_rcmd: float = 20.0, warmup: float = 20.0,
                       horizon: float | None = None) -> dict:
    """Closed-loop replay over a database with recorded torques as actions.

    Warm-up uses true states/actions over [t_rcmd - warmup, t_rcmd]; the rest
    of each transient is predicted recursively. Returns per-feature RMSE and
    the stacked predictions.
    """
    trs = database.transients
    t_axis = trs[0].time
    cadence = float(t_axis[1] - t_axis[0])
    t_end = horizon if horizon is not None else float(t_axis[-1])
    n_steps = int(round((t_end - t_rcmd) / cadence))
    b = len(trs)
    if warmup <= 0:
        # degraded: no history at all -- cold hidden state, prior seed
        state = model.net.zero_state(b)
        x0 = np.repeat(model.in_norm.mean[None, :model.n_state], b, axis=0)
    else:
        hist_list = [_true_history(tr, model, t_rcmd - warmup, t_rcmd)
                     for tr in trs]
        n_h = len(hist_list[0].times)
        if n_h > 1:
            inp = np.stack([np.concatenate([h.states[:-1], h.actions[:-1]], axis=1)
                            for h in hist_list])
            _, state = model.net.forward(model.in_norm.transform(inp))
        else:
            state = model.net.zero_state(b)
        x0 = np.stack([h.states[-1] for h in hist_list])
    sel = (t_axis > t_rcmd - 1e-9) & (t_axis <= t_rcmd + n_steps * cadence + 1e-9)
    sel_t = t_axis[sel][:n_steps + 1]
    actions = np.stack([tr.column_matrix(model.action_features)[sel][:n_steps]
                        for tr in trs])
    preds = closed_loop(model, state, x0, actions)
    truth = np.stack([tr.column_matrix(model.state_features)[sel][1:n_steps + 1]
                      for tr in trs])
    per_rmse = {name: rmse_metric(preds[:, :, j], truth[:, :, j])
                for j, name in enumerate(model.state_features)}
    per_mse = {k: v * v for k, v in per_rmse.items()}
    return {"rmse": per_rmse, "mse": per_mse, "predictions": preds,
            "truth": truth, "times": sel_t[1:]}


def history_sensitivity(model: PrognosisModel, database: Database,
                        history_lengths: Sequence[float], t_rcmd: float = 30.0,
                        horizon: float | None = None) -> dict:
    """Replay the closed loop with different warm-up history lengths.

    Returns mean squared prediction error of the first state feature per
    history length (seconds of history before the prediction start).
    """
    out = {}
    for h in history_lengths:
        if h < 0:
            raise ValueError("history length must be >= 0")
        rep = replay_closed_loop(model, database, t_rcmd=t_rcmd, warmup=float(h),
                                 horizon=horizon)
        first = model.state_features[0]
        out[float(h)] = rep["mse"][first]
    return out
