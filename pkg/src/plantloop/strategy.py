"""Piecewise-linear torque trajectories and mitigation-candidate enumeration.

The malfunctioning pump's future torque is extrapolated from its last
measurement to an assumed final value; the controllable pump's curve ramps
from nominal to a candidate's final torque over a configured window. Both
curves are continuous at every breakpoint, including the recommendation time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np


class StrategyError(Exception):
    pass


class InvalidEstimate(StrategyError):
    pass


class NoCandidates(StrategyError):
    pass


@dataclass(frozen=True)
class MalfunctionEstimate:
    """Assumed shape of the ongoing malfunction of the uncontrolled pump."""

    t_acc: float        # malfunction start, s
    t1_end: float       # malfunction end, s
    tau1_end: float     # final torque, N*m

    def __post_init__(self):
        if self.t_acc >= self.t1_end:
            raise InvalidEstimate("malfunction start must precede its end")
        if self.tau1_end < 0:
            raise InvalidEstimate("final torque must be >= 0")


@dataclass(frozen=True)
class CandidateStrategy:
    """One mitigation option: ramp pump 2 from nominal to tau2_end."""

    tau2_end: float     # final torque, N*m
    t_trip: float       # ramp start, s
    t2_end: float       # ramp end, s
    tau0: float         # nominal torque, N*m

    def __post_init__(self):
        if self.t_trip >= self.t2_end:
            raise StrategyError("ramp start must precede ramp end")
        if self.tau2_end < 0:
            raise StrategyError("final torque must be >= 0")


class PiecewiseCurve:
    """Sorted breakpoints with linear interpolation and flat extrapolation."""

    def __init__(self, times: Sequence[float], values: Sequence[float]):
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.size < 1 or t.size != v.size:
            raise StrategyError("need matching non-empty breakpoint arrays")
        if np.any(np.diff(t) < 0):
            raise StrategyError("breakpoint times must be non-decreasing")
        self.times = t
        self.values = v

    def value_at(self, t) -> float | np.ndarray:
        out = np.interp(t, self.times, self.values)
        return float(out) if np.isscalar(t) else out

    def __call__(self, t):
        return self.value_at(t)

    def sample(self, t_grid: np.ndarray) -> np.ndarray:
        return np.interp(t_grid, self.times, self.values)


@dataclass
class TorqueSchedule:
    """Torque trajectories for both pumps over [0, horizon]."""

    pump1: PiecewiseCurve
    pump2: PiecewiseCurve
    t_rcmd: float
    horizon: float
    candidate: CandidateStrategy | None = None

    def sampled(self, cadence: float = 1.0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        grid = np.arange(0.0, self.horizon + 0.5 * cadence, cadence)
        return grid, self.pump1.sample(grid), self.pump2.sample(grid)


def predict_psp1_curve(measured_times: Sequence[float],
                       measured_torques: Sequence[float],
                       estimate: MalfunctionEstimate,
                       horizon: float) -> PiecewiseCurve:
    """Assemble the malfunctioning pump's curve: measurements up to the last
    sample, then a linear run-down to the estimated final torque.

    The analytic segment starts at the last measured value, so the curve is
    continuous at the recommendation time by construction.
    """
    t_m = np.asarray(measured_times, dtype=float)
    v_m = np.asarray(measured_torques, dtype=float)
    if t_m.size == 0:
        raise StrategyError("need at least one torque measurement")
    t_rcmd = float(t_m[-1])
    tau_rcmd = float(v_m[-1])
    if estimate.t1_end <= t_rcmd:
        # Malfunction already finished; the measured plateau must agree.
        if abs(tau_rcmd - estimate.tau1_end) > 1e-6 * max(1.0, abs(estimate.tau1_end)):
            raise InvalidEstimate(
                f"malfunction ended at {estimate.t1_end}s but last measurement "
                f"{tau_rcmd} differs from the estimated plateau {estimate.tau1_end}")
        times = np.concatenate([t_m, [horizon]])
        values = np.concatenate([v_m, [estimate.tau1_end]])
        return PiecewiseCurve(times, values)
    times = np.concatenate([t_m, [estimate.t1_end, horizon]])
    values = np.concatenate([v_m, [estimate.tau1_end, estimate.tau1_end]])
    return PiecewiseCurve(times, values)


def predict_psp2_curve(candidate: CandidateStrategy, horizon: float) -> PiecewiseCurve:
    """Controllable-pump curve: nominal until the trip, linear ramp, plateau.
    A ramp still in progress at the horizon is truncated there."""
    c = candidate

    def ramp_value(t: float) -> float:
        return c.tau0 + (c.tau2_end - c.tau0) * (t - c.t_trip) / (c.t2_end - c.t_trip)

    times: list[float] = []
    values: list[float] = []
    if c.t_trip > 0:
        times += [0.0, c.t_trip]
        values += [c.tau0, c.tau0]
    else:
        times.append(0.0)
        values.append(ramp_value(0.0))
    if c.t2_end < horizon:
        times += [c.t2_end, horizon]
        values += [c.tau2_end, c.tau2_end]
    else:
        times.append(horizon)
        values.append(ramp_value(horizon))
    return PiecewiseCurve(times, values)


AvailabilityPredicate = Callable[[CandidateStrategy, dict], bool]


def enumerate_candidates(tau2_grid: Sequence[float],
                         t_trip_grid: Sequence[float],
                         diagnosed_ssf: dict,
                         predicate: AvailabilityPredicate | None = None,
                         tau0: float = 636.57,
                         ramp_duration: float = 50.0,
                         horizon: float = 250.0,
                         pump1_curve: PiecewiseCurve | None = None,
                         t_rcmd: float = 0.0) -> list[tuple[CandidateStrategy, TorqueSchedule]]:
    """Grid of candidates filtered by the availability predicate.

    Returns (candidate, schedule) pairs in grid order (tau2 outer, t_trip
    inner). Raises NoCandidates when the filter removes everything; callers
    escalate that to the scram path.
    """
    if len(tau2_grid) == 0 or len(t_trip_grid) == 0:
        raise StrategyError("candidate grid must be non-empty")
    out = []
    for tau2 in tau2_grid:
        for t_trip in t_trip_grid:
            cand = CandidateStrategy(tau2_end=float(tau2), t_trip=float(t_trip),
                                     t2_end=float(t_trip) + ramp_duration, tau0=tau0)
            if predicate is not None and not predicate(cand, diagnosed_ssf):
                continue
            p2 = predict_psp2_curve(cand, horizon)
            p1 = pump1_curve or PiecewiseCurve([0.0, horizon], [tau0, tau0])
            out.append((cand, TorqueSchedule(pump1=p1, pump2=p2, t_rcmd=t_rcmd,
                                             horizon=horizon, candidate=cand)))
    if not out:
        raise NoCandidates("availability predicate rejected every candidate")
    return out


@dataclass
class ReferenceTable:
    """Max-reachable peak fuel temperature per candidate, built by brute-force
    simulator runs under a reference malfunction.

    A candidate is available for a diagnosed peak fuel temperature when the
    tabulated maximum, shifted by the diagnosis excess over the table's
    baseline, stays below the safety limit.
    """

    rows: list            # (tau2_end, t_trip, max_reachable_pfcl)
    baseline_pfcl: float
    limit: float = 685.0

    def lookup(self, cand: CandidateStrategy) -> float | None:
        best, best_d = None, np.inf
        for tau2, t_trip, pfcl in self.rows:
            d = abs(tau2 - cand.tau2_end) + abs(t_trip - cand.t_trip)
            if d < best_d:
                best, best_d = pfcl, d
        return best

    def predicate(self) -> AvailabilityPredicate:
        def available(cand: CandidateStrategy, diagnosed: dict) -> bool:
            max_pfcl = self.lookup(cand)
            if max_pfcl is None:
                return False
            shift = diagnosed.get("pfcl_temp", self.baseline_pfcl) - self.baseline_pfcl
            return max_pfcl + shift < self.limit
        return available

    def save_csv(self, path: str | Path) -> None:
        lines = ["tau2_end,t_trip,max_reachable_pfcl"]
        for tau2, t_trip, pfcl in self.rows:
            lines.append(f"{tau2:.17g},{t_trip:.17g},{pfcl:.17g}")
        lines.append(f"# baseline_pfcl={self.baseline_pfcl:.17g} limit={self.limit:.17g}")
        Path(path).write_text("\n".join(lines) + "\n")

    @staticmethod
    def load_csv(path: str | Path) -> "ReferenceTable":
        text = Path(path).read_text().strip().splitlines()
        rows = []
        baseline, limit = 605.8, 685.0
        for line in text[1:]:
            if line.startswith("#"):
                parts = dict(kv.split("=") for kv in line[1:].split())
                baseline = float(parts["baseline_pfcl"])
                limit = float(parts["limit"])
                continue
            tau2, t_trip, pfcl = (float(v) for v in line.split(","))
            rows.append((tau2, t_trip, pfcl))
        return ReferenceTable(rows=rows, baseline_pfcl=baseline, limit=limit)


def build_reference_table(simulator, tau2_grid: Sequence[float],
                          t_trip_grid: Sequence[float],
                          reference_malfunction, ramp_duration: float = 50.0,
                          horizon: float = 250.0, limit: float = 685.0) -> ReferenceTable:
    """Brute-force the max-reachable peak fuel temperature for every grid
    candidate under the reference malfunction curve."""
    tau0 = simulator.params.nominal_torque
    cands = [CandidateStrategy(float(t2), float(tt), float(tt) + ramp_duration, tau0)
             for t2 in tau2_grid for tt in t_trip_grid]
    fns2 = [predict_psp2_curve(c, horizon).value_at for c in cands]
    fns1 = [reference_malfunction] * len(cands)
    results = simulator.run_batch(fns1, fns2, t_end=horizon)
    rows = [(c.tau2_end, c.t_trip, float(cols["pfcl_temp"].max()))
            for c, (_, cols) in zip(cands, results)]
    baseline = simulator.params.pfcl_nominal
    return ReferenceTable(rows=rows, baseline_pfcl=baseline, limit=limit)
