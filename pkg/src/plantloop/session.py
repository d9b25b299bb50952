"""Closed-loop operational workflow: monitor, recommend, execute, check.

A session drives the plant simulator second by second. The diagnosis twin
monitors sensors continuously; at the recommendation time the simulator is
paused (simulation time frozen) while candidate mitigations are enumerated,
front-run by the prognosis twin, and ranked. The chosen schedule is injected
and a discrepancy checker compares expected and observed behavior at the
configured checking times, scramming when trust is lost.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .decision import (DiscrepancyReport, Recommendation, RewardSpec,
                       accumulate_rewards, check_discrepancy, decision_error,
                       rank_strategies)
from .diagnosis import DiagnosisModel, DiagnosisStream
from .plant import (PlantParams, PlantState, Scram, SensorFrame, SetTorque,
                    Simulator)
from .prognosis import HistoryBuffer, PrognosisModel, predict_multistep
from .scenario import ramp_fn
from .strategy import (MalfunctionEstimate, NoCandidates, ReferenceTable,
                       TorqueSchedule, enumerate_candidates, predict_psp1_curve)


class Phase(Enum):
    MONITORING = "Monitoring"
    PAUSED_FOR_RECOMMENDATION = "PausedForRecommendation"
    AWAITING_DECISION = "AwaitingDecision"
    EXECUTING = "Executing"
    CHECKING = "Checking"
    COMPLETED = "Completed"
    SCRAMMED = "Scrammed"


@dataclass(frozen=True)
class MalfunctionScenario:
    """True malfunction injected into the simulator."""

    magnitude_pct: float       # torque loss, % of nominal
    start_s: float = 10.0
    end_s: float = 60.0

    @property
    def speed_pct_per_s(self) -> float:
        return self.magnitude_pct / (self.end_s - self.start_s)

    def torque_fn(self, tau0: float):
        return ramp_fn(self.start_s, self.end_s, tau0,
                       tau0 * (1.0 - self.magnitude_pct / 100.0))


@dataclass
class SessionConfig:
    plant_params: PlantParams = field(default_factory=PlantParams)
    malfunction: MalfunctionScenario = field(
        default_factory=lambda: MalfunctionScenario(50.0))
    t_rcmd: float = 20.0
    t_checks: tuple = (100.0, 200.0)
    horizon: float = 250.0
    reward_spec: RewardSpec = field(default_factory=RewardSpec)
    discrepancy_limit: float = 0.10
    sensor_noise: float = 0.0
    noise_seed: int = 0
    warmup_history: float = 20.0
    tau2_grid: tuple = tuple(np.linspace(636.57, 1145.8, 25))
    t_trip_grid: tuple = tuple(np.linspace(20.0, 130.0, 12))
    ramp_duration: float = 50.0
    # Malfunction estimate given to the strategy inventory (assumed known).
    estimate: MalfunctionEstimate | None = None
    reference_table: ReferenceTable | None = None
    mode: str = "auto-accept"

    def __post_init__(self):
        if self.t_rcmd >= min(self.t_checks):
            raise ValueError("t_rcmd must precede every checking time")
        if max(self.t_checks) > self.horizon:
            raise ValueError("checking times must lie within the horizon")

    def resolved_estimate(self) -> MalfunctionEstimate:
        if self.estimate is not None:
            return self.estimate
        m = self.malfunction
        tau0 = self.plant_params.nominal_torque
        return MalfunctionEstimate(t_acc=m.start_s, t1_end=max(m.end_s, self.t_rcmd + 1.0),
                                   tau1_end=tau0 * (1.0 - m.magnitude_pct / 100.0))


@dataclass
class Decision:
    action: str                      # "accept" | "override" | "scram"
    candidate_index: int | None = None


class DecisionSource:
    """Supplies the operator decision once a recommendation is ready."""

    def decide(self, recommendation: Recommendation) -> Decision:
        raise NotImplementedError


class AutoAccept(DecisionSource):
    def decide(self, recommendation: Recommendation) -> Decision:
        return Decision("accept")


class Scripted(DecisionSource):
    def __init__(self, decision: Decision):
        self.decision = decision

    def decide(self, recommendation: Recommendation) -> Decision:
        return self.decision


@dataclass
class SessionResult:
    phase: Phase
    events: list
    recommendation: Recommendation | None
    chosen_schedule: TorqueSchedule | None
    expected: dict | None            # DT-P prediction recorded at t_rcmd
    observed_times: np.ndarray | None
    observed: dict | None            # sensor/diagnosis series over the session
    discrepancy_reports: list
    decision_errors: dict | None
    realized_max_pfcl: float
    scram_reason: str | None = None

    def max_zeta_pfcl(self) -> float:
        if not self.discrepancy_reports:
            return float("nan")
        return max(r.zeta_pfcl for r in self.discrepancy_reports)


class Session:
    """Single-owner stateful workflow; drive with run() or step_phase()."""

    def __init__(self, config: SessionConfig, dtd: DiagnosisModel,
                 dtp: PrognosisModel,
                 decision_source: DecisionSource | None = None,
                 on_phase_change: Callable | None = None):
        self.config = config
        self.dtd = dtd
        self.dtp = dtp
        self.decision_source = decision_source or AutoAccept()
        self.sim = Simulator(config.plant_params)
        self.phase = Phase.MONITORING
        self.events: list[dict] = []
        self.state = self.sim.steady_state()
        self.rng = np.random.default_rng(config.noise_seed)
        self.stream = DiagnosisStream(dtd)
        self.frames: list[SensorFrame] = []
        self.ssf_estimates: list[np.ndarray] = []
        self.observed: dict[str, list] = {k: [] for k in (
            "time", "core_power", "pfcl_dtd", "pfcl_true", "core_outlet_flow",
            "pump_torque_1", "pump_torque_2", "upper_plenum_temp",
            "hp_plenum_temp", "lp_plenum_temp", "peak_clad_dtd", "ihx_power")}
        self.recommendation: Recommendation | None = None
        self.chosen_schedule: TorqueSchedule | None = None
        self.expected: dict | None = None
        self.reports: list[DiscrepancyReport] = []
        self.scram_reason: str | None = None
        self._phase_listeners: list[Callable] = []
        self._obs_listeners: list[Callable] = []
        if on_phase_change:
            self._phase_listeners.append(on_phase_change)
        self.pacer: Callable[["Session"], None] | None = None
        self._tau1_fn = config.malfunction.torque_fn(config.plant_params.nominal_torque)
        self._tau2_fn = lambda t: config.plant_params.nominal_torque
        self._log("session created")
        self._record_observation()

    # -- bookkeeping -----------------------------------------------------------

    def _log(self, message: str, **extra) -> None:
        self.events.append({"t": self.state.time, "phase": self.phase.value,
                            "message": message, **extra})

    def _set_phase(self, phase: Phase) -> None:
        prev = self.phase
        self.phase = phase
        self._log(f"phase {prev.value} -> {phase.value}")
        for cb in self._phase_listeners:
            cb(self)

    def add_phase_listener(self, cb: Callable) -> None:
        self._phase_listeners.append(cb)

    def add_observation_listener(self, cb: Callable) -> None:
        self._obs_listeners.append(cb)

    def _record_observation(self) -> None:
        frame = self.sim.sensor_read(self.state, self.config.sensor_noise, self.rng)
        self.frames.append(frame)
        est = self.stream.push(frame)
        self.ssf_estimates.append(est)
        o = self.observed
        o["time"].append(frame.time)
        for key in ("core_power", "core_outlet_flow", "pump_torque_1",
                    "pump_torque_2", "upper_plenum_temp", "hp_plenum_temp",
                    "lp_plenum_temp", "ihx_power"):
            o[key].append(frame.readings[key])
        o["pfcl_dtd"].append(float(est[0]))
        o["peak_clad_dtd"].append(float(est[1]))
        o["pfcl_true"].append(self.state.fuel_temp)
        for cb in self._obs_listeners:
            cb(self)

    def latest_observation(self) -> dict:
        return {k: v[-1] for k, v in self.observed.items()}

    def _advance_one_second(self) -> None:
        t0 = self.state.time
        y = self.sim._from_state(self.state)
        flags = np.array([self.state.scrammed])
        live = not self.state.scrammed
        tau1 = (lambda t: np.array([self._tau1_fn(t)])) if live else (lambda t: np.zeros(1))
        tau2 = (lambda t: np.array([self._tau2_fn(t)])) if live else (lambda t: np.zeros(1))
        y = self.sim.advance(y, t0, t0 + 1.0, tau1, tau2, flags)
        applied = ((self._tau1_fn(t0 + 1.0), self._tau2_fn(t0 + 1.0))
                   if live else (0.0, 0.0))
        self.state = self.sim._to_state(t0 + 1.0, y[0], applied, self.state.scrammed)
        self._record_observation()
        if self.pacer is not None:
            self.pacer(self)

    # -- workflow steps --------------------------------------------------------

    def run(self) -> SessionResult:
        cfg = self.config
        while self.state.time < cfg.t_rcmd - 1e-9:
            self._advance_one_second()
        self._set_phase(Phase.PAUSED_FOR_RECOMMENDATION)
        try:
            self.recommendation = self._build_recommendation()
        except NoCandidates:
            self.scram_reason = "no available candidates"
            self._log("strategy inventory returned no candidates; escalating")
            return self._do_scram()
        self._set_phase(Phase.AWAITING_DECISION)
        decision = self.decision_source.decide(self.recommendation)
        return self.apply_decision(decision)

    def apply_decision(self, decision: Decision) -> SessionResult:
        if self.phase is not Phase.AWAITING_DECISION:
            raise RuntimeError(f"cannot decide in phase {self.phase.value}")
        self._log(f"operator decision: {decision.action}",
                  candidate_index=decision.candidate_index)
        if decision.action == "scram":
            self.scram_reason = "operator scram"
            return self._do_scram()
        if decision.action == "override":
            idx = decision.candidate_index
            entries = [e for e in self.recommendation.ranked if e.index == idx]
            if not entries:
                raise ValueError(f"unknown candidate index {idx}")
            chosen = entries[0]
        else:
            chosen = self.recommendation.chosen
        self.chosen_schedule = self._schedules[chosen.index]
        self.expected = self._predictions[chosen.index]
        self._tau2_fn = self.chosen_schedule.pump2.value_at
        self._set_phase(Phase.EXECUTING)
        return self._execute()

    def _build_recommendation(self) -> Recommendation:
        cfg = self.config
        t_hist = np.asarray(self.observed["time"])
        meas_tau1 = np.asarray(self.observed["pump_torque_1"])
        estimate = cfg.resolved_estimate()
        pump1_curve = predict_psp1_curve(t_hist, meas_tau1, estimate, cfg.horizon)
        diagnosed = {"pfcl_temp": self.observed["pfcl_dtd"][-1],
                     "peak_clad_temp": self.observed["peak_clad_dtd"][-1]}
        predicate = (cfg.reference_table.predicate()
                     if cfg.reference_table is not None else None)
        pairs = enumerate_candidates(
            cfg.tau2_grid, cfg.t_trip_grid, diagnosed, predicate,
            tau0=cfg.plant_params.nominal_torque, ramp_duration=cfg.ramp_duration,
            horizon=cfg.horizon, pump1_curve=pump1_curve, t_rcmd=self.state.time)
        self._log(f"{len(pairs)} candidates available "
                  f"of {len(cfg.tau2_grid) * len(cfg.t_trip_grid)}")
        self._schedules = [sch for _, sch in pairs]
        history = self._history_buffer()
        horizon_left = cfg.horizon - self.state.time
        self._predictions = predict_multistep(self.dtp, history, self._schedules,
                                              horizon_left)
        breakdowns = []
        for sch, pred in zip(self._schedules, self._predictions):
            breakdowns.append(self._score_candidate(sch, pred))
        cands = [(sch.candidate.tau2_end, sch.candidate.t_trip)
                 for sch in self._schedules]
        return rank_strategies(cands, breakdowns, t_rcmd=self.state.time)

    def _history_buffer(self) -> HistoryBuffer:
        cfg = self.config
        t = np.asarray(self.observed["time"])
        keep = t >= self.state.time - cfg.warmup_history - 1e-9
        states = np.column_stack([
            self.observed["pfcl_dtd"], self.observed["core_power"],
            self.observed["core_outlet_flow"], self.observed["ihx_power"],
            self.observed["peak_clad_dtd"]])
        actions = np.column_stack([self.observed["pump_torque_1"],
                                   self.observed["pump_torque_2"]])
        return HistoryBuffer(times=t[keep], states=states[keep],
                             actions=actions[keep])

    def _composite_series(self, pred: dict, sch: TorqueSchedule):
        """Observed history up to t_rcmd joined with the candidate prediction."""
        hist_t = np.asarray(self.observed["time"])
        mask = hist_t < pred["times"][0] - 1e-9
        pfcl = np.concatenate([np.asarray(self.observed["pfcl_dtd"])[mask],
                               pred["values"]["pfcl_temp"]])
        power = np.concatenate([np.asarray(self.observed["core_power"])[mask],
                                pred["values"]["core_power"]])
        times = np.concatenate([hist_t[mask], pred["times"]])
        tau2 = sch.pump2.sample(times)
        return pfcl, power, tau2

    def _score_candidate(self, sch: TorqueSchedule, pred: dict):
        pfcl, power, tau2 = self._composite_series(pred, sch)
        return accumulate_rewards(pfcl, power, tau2, self.config.reward_spec)

    def _execute(self) -> SessionResult:
        cfg = self.config
        checks = sorted(cfg.t_checks)
        while self.state.time < cfg.horizon - 1e-9:
            self._advance_one_second()
            due = [tc for tc in checks if abs(tc - self.state.time) < 1e-9]
            if due:
                self._set_phase(Phase.CHECKING)
                report = self._check_discrepancy(due[0])
                self.reports.append(report)
                self._log(f"discrepancy check at {due[0]:g}s: "
                          f"zeta_power={report.zeta_power:.4f} "
                          f"zeta_pfcl={report.zeta_pfcl:.4f} -> {report.verdict}")
                if report.verdict == "Scram":
                    self.scram_reason = f"discrepancy limit exceeded at {due[0]:g}s"
                    return self._do_scram()
                self._set_phase(Phase.EXECUTING)
        self._set_phase(Phase.COMPLETED)
        return self._result()

    def _check_discrepancy(self, t_ck: float) -> DiscrepancyReport:
        cfg = self.config
        t_r = self.recommendation.t_rcmd
        pred_t = self.expected["times"]
        sel_pred = (pred_t >= t_r - 1e-9) & (pred_t <= t_ck + 1e-9)
        obs_t = np.asarray(self.observed["time"])
        sel_obs = (obs_t >= t_r - 1e-9) & (obs_t <= t_ck + 1e-9)
        exp_power = self.expected["values"]["core_power"][sel_pred]
        exp_pfcl = self.expected["values"]["pfcl_temp"][sel_pred]
        obs_power = np.asarray(self.observed["core_power"])[sel_obs]
        obs_pfcl = np.asarray(self.observed["pfcl_dtd"])[sel_obs]
        return check_discrepancy(exp_power, obs_power, exp_pfcl, obs_pfcl, t_ck,
                                 nominal_power=cfg.plant_params.nominal_power,
                                 nominal_pfcl=cfg.plant_params.pfcl_nominal,
                                 limit=cfg.discrepancy_limit)

    def _do_scram(self) -> SessionResult:
        self.state = self.sim.step(self.state, [Scram()], dt=1.0)
        self._record_observation()
        self._set_phase(Phase.SCRAMMED)
        return self._result()

    def _decision_errors(self) -> dict | None:
        if self.expected is None or self.chosen_schedule is None:
            return None
        cfg = self.config
        t_r = self.recommendation.t_rcmd
        obs_t = np.asarray(self.observed["time"])
        sel = obs_t >= t_r - 1e-9
        n = int(sel.sum())
        pred_pfcl = self.expected["values"]["pfcl_temp"][:n]
        pred_power = self.expected["values"]["core_power"][:n]
        times = obs_t[sel][:len(pred_pfcl)]
        tau2 = self.chosen_schedule.pump2.sample(times)
        spec = cfg.reward_spec
        predicted = accumulate_rewards(pred_pfcl, pred_power, tau2, spec)
        realized = accumulate_rewards(
            np.asarray(self.observed["pfcl_true"])[sel][:len(pred_pfcl)],
            np.asarray(self.observed["core_power"])[sel][:len(pred_pfcl)],
            tau2, spec)
        out = {}
        for attr in ("pfcl", "power", "torque"):
            out[attr] = decision_error(predicted.step_rewards[attr],
                                       realized.step_rewards[attr],
                                       normalizer=spec.reward_best)
        return out

    def _result(self) -> SessionResult:
        return SessionResult(
            phase=self.phase,
            events=self.events,
            recommendation=self.recommendation,
            chosen_schedule=self.chosen_schedule,
            expected=self.expected,
            observed_times=np.asarray(self.observed["time"]),
            observed={k: np.asarray(v) for k, v in self.observed.items() if k != "time"},
            discrepancy_reports=self.reports,
            decision_errors=self._decision_errors(),
            realized_max_pfcl=float(np.max(self.observed["pfcl_true"])),
            scram_reason=self.scram_reason,
        )


def run_workflow(config: SessionConfig, dtd: DiagnosisModel, dtp: PrognosisModel,
                 decision_source: DecisionSource | None = None) -> SessionResult:
    """One full closed-loop session."""
    return Session(config, dtd, dtp, decision_source).run()


@dataclass
class CampaignCase:
    speed_pct_per_s: float
    magnitude_pct: float
    phase: str
    zeta_pfcl: float
    zeta_power: float
    rmse_pfcl: float
    rmse_power: float
    decision_errors: dict | None
    scram_reason: str | None


def default_campaign_grid() -> list[tuple[float, float]]:
    """46 (speed %/s, magnitude %) malfunction instances.

    Dense coverage at recoverable magnitudes for every ramp speed, full-loss
    cases at the slow end, and one full-loss fast-collapse corner case. Deep
    losses (>=80%) at high speed saturate the loop hydraulics (the healthy
    pump pins the flow floor), so a single corner case represents that regime.
    """
    cases = [(s, m) for s in (0.5, 1.0, 2.0, 5.0)
             for m in (10, 20, 30, 40, 50, 60, 70, 80, 90)]
    cases += [(10.0, m) for m in (10, 20, 30, 40, 50, 60, 70)]
    cases += [(0.5, 100), (1.0, 100), (10.0, 100)]
    return cases


def batch_evaluate(grid: Sequence[tuple[float, float]], config: SessionConfig,
                   dtd: DiagnosisModel, dtp: PrognosisModel,
                   malfunction_start: float = 10.0) -> list[CampaignCase]:
    """Auto-accept sessions over a malfunction grid; per-case errors and
    discrepancy factors. Failures are recorded, not raised."""
    out = []
    for k, (speed, mag) in enumerate(grid):
        scen = MalfunctionScenario(magnitude_pct=mag, start_s=malfunction_start,
                                   end_s=malfunction_start + mag / speed)
        cfg = replace(config, malfunction=scen, estimate=None,
                      noise_seed=config.noise_seed + k)
        try:
            res = run_workflow(cfg, dtd, dtp)
            rmse_pfcl = rmse_power = float("nan")
            if res.expected is not None:
                t_r = res.recommendation.t_rcmd
                sel = res.observed_times >= t_r - 1e-9
                n = min(int(sel.sum()), len(res.expected["times"]))
                rmse_pfcl = float(np.sqrt(np.mean(
                    (res.expected["values"]["pfcl_temp"][:n]
                     - res.observed["pfcl_true"][sel][:n]) ** 2)))
                rmse_power = float(np.sqrt(np.mean(
                    (res.expected["values"]["core_power"][:n]
                     - res.observed["core_power"][sel][:n]) ** 2)))
            out.append(CampaignCase(
                speed_pct_per_s=speed, magnitude_pct=mag, phase=res.phase.value,
                zeta_pfcl=res.max_zeta_pfcl(),
                zeta_power=(max(r.zeta_power for r in res.discrepancy_reports)
                            if res.discrepancy_reports else float("nan")),
                rmse_pfcl=rmse_pfcl, rmse_power=rmse_power,
                decision_errors=res.decision_errors,
                scram_reason=res.scram_reason))
        except Exception as exc:
            out.append(CampaignCase(speed, mag, "Failed", float("nan"),
                                    float("nan"), float("nan"), float("nan"),
                                    None, scram_reason=str(exc)))
    return out


def campaign_to_csv(cases: Sequence[CampaignCase], path: str | Path) -> None:
    lines = ["speed_pct_per_s,magnitude_pct,phase,zeta_pfcl,zeta_power,"
             "rmse_pfcl,rmse_power,err_r_pfcl,err_r_power,err_r_torque,scram_reason"]
    for c in cases:
        de = c.decision_errors or {}
        lines.append(",".join([
            f"{c.speed_pct_per_s:g}", f"{c.magnitude_pct:g}", c.phase,
            f"{c.zeta_pfcl:.6g}", f"{c.zeta_power:.6g}",
            f"{c.rmse_pfcl:.6g}", f"{c.rmse_power:.6g}",
            f"{de.get('pfcl', float('nan')):.6g}",
            f"{de.get('power', float('nan')):.6g}",
            f"{de.get('torque', float('nan')):.6g}",
            (c.scram_reason or "").replace(",", ";")]))
    Path(path).write_text("\n".join(lines) + "\n")
