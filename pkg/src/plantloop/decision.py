"""Multi-attribute reward scoring, strategy ranking, discrepancy checking.

Three attributes are scored per time step against banded operating regions:
peak fuel centerline temperature, fractional core-power variation, and
fractional variation of the controllable pump's torque. Region rewards are
accumulated with a rectangle rule and combined as a weighted sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .analytics import rmse


class Region(Enum):
    BEST = "best"
    GOOD = "good"
    BAD = "bad"


class DecisionError(Exception):
    pass


class WindowMismatch(DecisionError):
    pass


class ZeroNormalizer(DecisionError):
    pass


@dataclass(frozen=True)
class RewardSpec:
    """Region bounds and rewards.

    Peak fuel temperature: best in (600, 615], good in (615, 685], bad above
    685; below 600 the band down to ``pfcl_floor`` is good (safe but
    sub-nominal) and anything colder is bad. Power and torque attributes are
    classified on absolute fractional variation from nominal.
    """

    pfcl_best: tuple[float, float] = (600.0, 615.0)   # (lo, hi], degC
    pfcl_good_hi: float = 685.0
    pfcl_floor: float = 550.0
    power_best: float = 0.10       # |dq|/q0 <= best
    power_good: float = 0.20
    torque_best: float = 0.25
    torque_good: float = 0.50
    reward_best: float = 5.0
    reward_good: float = 1.0
    reward_bad: float = -10.0
    weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    nominal_power: float = 6.0e7
    nominal_torque: float = 636.57
    horizon: float = 250.0

    def __post_init__(self):
        if any(w < 0 for w in self.weights):
            raise DecisionError("weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise DecisionError("weights must sum to 1")

    def region_reward(self, region: Region) -> float:
        return {Region.BEST: self.reward_best, Region.GOOD: self.reward_good,
                Region.BAD: self.reward_bad}[region]


def classify_region(attribute: str, value: float, spec: RewardSpec) -> Region:
    """Total deterministic classification per the region bounds."""
    if not np.isfinite(value):
        raise DecisionError("attribute value must be finite")
    if attribute == "pfcl":
        lo, hi = spec.pfcl_best
        if lo < value <= hi:
            return Region.BEST
        if hi < value <= spec.pfcl_good_hi:
            return Region.GOOD
        if spec.pfcl_floor < value <= lo:
            return Region.GOOD
        return Region.BAD
    if attribute == "power":
        v = abs(value)
        if v <= spec.power_best:
            return Region.BEST
        if v <= spec.power_good:
            return Region.GOOD
        return Region.BAD
    if attribute == "torque":
        v = abs(value)
        if v <= spec.torque_best:
            return Region.BEST
        if v <= spec.torque_good:
            return Region.GOOD
        return Region.BAD
    raise DecisionError(f"unknown attribute {attribute!r}")


def _rewards_per_step(pfcl: np.ndarray, power: np.ndarray, torque2: np.ndarray,
                      spec: RewardSpec):
    """Vectorized per-step region rewards for the three attributes."""
    lo, hi = spec.pfcl_best
    r_pfcl = np.where(
        (pfcl > lo) & (pfcl <= hi), spec.reward_best,
        np.where(((pfcl > hi) & (pfcl <= spec.pfcl_good_hi))
                 | ((pfcl > spec.pfcl_floor) & (pfcl <= lo)),
                 spec.reward_good, spec.reward_bad))
    dp = np.abs(power - spec.nominal_power) / spec.nominal_power
    r_power = np.where(dp <= spec.power_best, spec.reward_best,
                       np.where(dp <= spec.power_good, spec.reward_good,
                                spec.reward_bad))
    dtq = np.abs(torque2 - spec.nominal_torque) / spec.nominal_torque
    r_torque = np.where(dtq <= spec.torque_best, spec.reward_best,
                        np.where(dtq <= spec.torque_good, spec.reward_good,
                                 spec.reward_bad))
    return r_pfcl, r_power, r_torque


@dataclass
class RewardBreakdown:
    pfcl_reward: float
    power_reward: float
    torque_reward: float
    total: float
    step_rewards: dict = field(default_factory=dict)   # attribute -> per-step series

    @staticmethod
    def combine(pfcl_r: float, power_r: float, torque_r: float,
                spec: RewardSpec, steps: dict | None = None) -> "RewardBreakdown":
        a, b, c = spec.weights
        return RewardBreakdown(pfcl_reward=pfcl_r, power_reward=power_r,
                               torque_reward=torque_r,
                               total=a * pfcl_r + b * power_r + c * torque_r,
                               step_rewards=steps or {})


def accumulate_rewards(pfcl: np.ndarray, power: np.ndarray, torque2: np.ndarray,
                       spec: RewardSpec, dt: float = 1.0) -> RewardBreakdown:
    """Rectangle-rule reward integral over the transient window.

    Series are sampled at cadence ``dt``; the step at the horizon endpoint is
    excluded so a constant-best transient over 250 s scores exactly
    ``reward_best * 250``.
    """
    n = min(len(pfcl), len(power), len(torque2))
    n_int = min(n, int(round(spec.horizon / dt)))
    r_p, r_q, r_t = _rewards_per_step(np.asarray(pfcl[:n_int]),
                                      np.asarray(power[:n_int]),
                                      np.asarray(torque2[:n_int]), spec)
    steps = {"pfcl": r_p, "power": r_q, "torque": r_t}
    return RewardBreakdown.combine(float(r_p.sum() * dt), float(r_q.sum() * dt),
                                   float(r_t.sum() * dt), spec, steps)


@dataclass
class RankedCandidate:
    index: int
    tau2_end: float
    t_trip: float
    breakdown: RewardBreakdown


@dataclass
class Recommendation:
    ranked: list               # RankedCandidate, descending total reward
    chosen: RankedCandidate
    t_rcmd: float
    reward_grid: dict          # {"tau2_values", "t_trip_values", "totals"}

    def chosen_index(self) -> int:
        return self.chosen.index


def rank_strategies(candidates: Sequence[tuple[float, float]],
                    breakdowns: Sequence[RewardBreakdown],
                    t_rcmd: float = 0.0) -> Recommendation:
    """Descending total reward; ties broken by smaller tau2_end, then earlier
    t_trip. Also assembles the reward grid over the candidate axes for
    contour rendering."""
    if len(candidates) == 0:
        raise DecisionError("need at least one candidate")
    entries = [RankedCandidate(i, float(c[0]), float(c[1]), b)
               for i, (c, b) in enumerate(zip(candidates, breakdowns))]
    entries.sort(key=lambda e: (-e.breakdown.total, e.tau2_end, e.t_trip))
    tau2_vals = sorted({e.tau2_end for e in entries})
    trip_vals = sorted({e.t_trip for e in entries})
    totals = np.full((len(tau2_vals), len(trip_vals)), np.nan)
    pos = {(e.tau2_end, e.t_trip): e.breakdown.total for e in entries}
    for i, t2 in enumerate(tau2_vals):
        for j, tt in enumerate(trip_vals):
            if (t2, tt) in pos:
                totals[i, j] = pos[(t2, tt)]
    grid = {"tau2_values": tau2_vals, "t_trip_values": trip_vals,
            "totals": totals}
    return Recommendation(ranked=entries, chosen=entries[0], t_rcmd=t_rcmd,
                          reward_grid=grid)


@dataclass
class DiscrepancyReport:
    t_ck: float
    zeta_power: float
    zeta_pfcl: float
    rmse_power: float
    rmse_pfcl: float
    limit: float
    verdict: str               # "Continue" | "Scram"


def check_discrepancy(expected_power: np.ndarray, observed_power: np.ndarray,
                      expected_pfcl: np.ndarray, observed_pfcl: np.ndarray,
                      t_ck: float, nominal_power: float, nominal_pfcl: float,
                      limit: float = 0.10) -> DiscrepancyReport:
    """Normalized expected-vs-observed RMSE over the checking window.

    The verdict is conservative: scram when either factor exceeds the limit.
    """
    if len(expected_power) != len(observed_power) or \
            len(expected_pfcl) != len(observed_pfcl):
        raise WindowMismatch("expected/observed windows differ in length")
    if nominal_power == 0 or nominal_pfcl == 0:
        raise ZeroNormalizer("nominal references must be non-zero")
    eps_q = rmse(expected_power, observed_power)
    eps_t = rmse(expected_pfcl, observed_pfcl)
    zeta_q = eps_q / abs(nominal_power)
    zeta_t = eps_t / abs(nominal_pfcl)
    verdict = "Scram" if max(zeta_q, zeta_t) > limit else "Continue"
    return DiscrepancyReport(t_ck=t_ck, zeta_power=zeta_q, zeta_pfcl=zeta_t,
                             rmse_power=eps_q, rmse_pfcl=eps_t, limit=limit,
                             verdict=verdict)


def decision_error(predicted_rewards: Sequence[float],
                   realized_rewards: Sequence[float],
                   normalizer: float) -> float:
    """Normalized RMSE between predicted and realized per-step rewards."""
    if normalizer == 0:
        raise ZeroNormalizer("reward normalizer must be non-zero")
    return rmse(predicted_rewards, realized_rewards) / abs(normalizer)
