"""One-at-a-time hyperparameter sensitivity scanning.

Each parameter is sampled independently from its designated range while the
others stay at their defaults; the strength of the relationship between the
sampled values and the resulting model errors is summarized by the Pearson
correlation coefficient, flagged as strong when |PCC| > 0.5.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .metrics import pearson, ZeroVariance

STRONG_PCC = 0.5


class ScanError(RuntimeError):
    pass


@dataclass(frozen=True)
class ParamRange:
    lo: float
    hi: float
    integer: bool = False
    log_scale: bool = False

    def draw(self, rng: np.random.Generator) -> float:
        if self.log_scale:
            lo = np.log(self.lo)
            hi = np.log(self.hi)
            v = float(np.exp(rng.uniform(lo, hi)))
        else:
            v = float(rng.uniform(self.lo, self.hi))
        return float(round(v)) if self.integer else v


@dataclass
class SensitivityReport:
    parameters: list
    samples: dict            # name -> sampled values
    errors: dict             # name -> objective per sample
    pcc: dict                # name -> PCC (nan when undefined)
    strong: dict             # name -> bool, |PCC| > 0.5
    failures: dict           # name -> failed sample count


def sensitivity_scan(space: dict[str, ParamRange],
                     objective: Callable[[dict], float],
                     defaults: dict[str, float],
                     n_samples: int = 20,
                     seed: int = 0) -> SensitivityReport:
    """Scan each hyperparameter independently. ``objective`` maps a full
    parameter dict to a scalar error; per-sample failures are tolerated up to
    20% for each parameter."""
    if n_samples < 10:
        raise ValueError("need at least 10 samples per parameter")
    report = SensitivityReport([], {}, {}, {}, {}, {})
    for k, name in enumerate(sorted(space)):
        rng = np.random.default_rng(np.random.SeedSequence((seed, k)))
        rule = space[name]
        values, errors = [], []
        failures = 0
        for _ in range(n_samples):
            v = rule.draw(rng)
            params = dict(defaults)
            params[name] = v
            try:
                err = float(objective(params))
            except Exception as exc:
                failures += 1
                warnings.warn(f"objective failed for {name}={v}: {exc}")
                continue
            values.append(v)
            errors.append(err)
        if len(values) < 0.8 * n_samples:
            raise ScanError(f"too many objective failures for {name}")
        try:
            rho = pearson(values, errors)
        except ZeroVariance:
            rho = float("nan")
        report.parameters.append(name)
        report.samples[name] = values
        report.errors[name] = errors
        report.pcc[name] = rho
        report.strong[name] = bool(abs(rho) > STRONG_PCC) if np.isfinite(rho) else False
        report.failures[name] = failures
    return report
