"""Simplified sequential model-based optimization.

A pared-down tree-structured Parzen estimator: after a random warm-up the
trial history is split at the gamma quantile of the objective; independent
1-D Parzen densities l(x) (good trials) and g(x) (bad trials) are fitted per
parameter, candidates are drawn from l, and the candidate maximizing the
l/g density ratio is evaluated next.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .kde import silverman_bandwidth
from .sensitivity import ParamRange

N_WARMUP = 20
N_CANDIDATES = 24
GAMMA = 0.25


@dataclass
class Trial:
    number: int
    params: dict
    objective: float | None
    failed: bool = False


@dataclass
class HyperoptResult:
    trials: list
    best_params: dict
    best_objective: float
    comparison: dict = field(default_factory=dict)

    def objectives(self) -> list:
        return [t.objective for t in self.trials if not t.failed]


def _parzen_logpdf(x: float, obs: np.ndarray, h: float) -> float:
    z = (x - obs) / h
    dens = np.mean(np.exp(-0.5 * z * z)) / (h * np.sqrt(2 * np.pi))
    return float(np.log(max(dens, 1e-300)))


def _bandwidth(obs: np.ndarray, rng_width: float) -> float:
    # The floor keeps proposals exploring; pure Silverman collapses onto the
    # incumbent cluster and stalls the search.
    if np.unique(obs).size < 2:
        return max(0.05 * rng_width, 1e-12)
    return max(silverman_bandwidth(obs), 0.05 * rng_width)


def smbo_optimize(objective: Callable[[dict], float],
                  space: dict[str, ParamRange],
                  n_trials: int = 100,
                  seed: int = 0,
                  defaults: dict | None = None) -> HyperoptResult:
    """Minimize ``objective`` over ``space``; deterministic for a fixed seed.

    The first N_WARMUP trials are uniform random; afterwards each parameter is
    proposed by sampling N_CANDIDATES points from the good-trial density and
    keeping the point with the best l/g ratio. Failed trials are logged and
    excluded from the density fits.
    """
    if n_trials < N_WARMUP:
        raise ValueError(f"need at least {N_WARMUP} trials")
    rng = np.random.default_rng(seed)
    names = sorted(space)
    trials: list[Trial] = []

    def draw_uniform() -> dict:
        return {n: space[n].draw(rng) for n in names}

    def propose() -> dict:
        done = [t for t in trials if not t.failed]
        if len(done) < 2:
            return draw_uniform()
        objs = np.array([t.objective for t in done])
        cut = np.quantile(objs, GAMMA)
        good = [t for t in done if t.objective <= cut]
        bad = [t for t in done if t.objective > cut]
        if not good or not bad:
            return draw_uniform()
        out = {}
        for n in names:
            r = space[n]
            width = r.hi - r.lo
            g_obs = np.array([t.params[n] for t in good], dtype=float)
            b_obs = np.array([t.params[n] for t in bad], dtype=float)
            h_g = _bandwidth(g_obs, width)
            h_b = _bandwidth(b_obs, width)
            best_x, best_score = None, -np.inf
            for _ in range(N_CANDIDATES):
                base = g_obs[rng.integers(len(g_obs))]
                x = float(np.clip(base + h_g * rng.normal(), r.lo, r.hi))
                if r.integer:
                    x = float(round(x))
                score = _parzen_logpdf(x, g_obs, h_g) - _parzen_logpdf(x, b_obs, h_b)
                if score > best_score:
                    best_x, best_score = x, score
            out[n] = best_x
        return out

    for k in range(n_trials):
        params = draw_uniform() if k < N_WARMUP else propose()
        try:
            val = float(objective(params))
            trials.append(Trial(k, params, val))
        except Exception as exc:
            warnings.warn(f"trial {k} failed: {exc}")
            trials.append(Trial(k, params, None, failed=True))

    done = [t for t in trials if not t.failed]
    if not done:
        raise RuntimeError("every trial failed")
    best = min(done, key=lambda t: t.objective)
    result = HyperoptResult(trials=trials, best_params=dict(best.params),
                            best_objective=best.objective)
    if defaults is not None:
        try:
            result.comparison = {"default_params": dict(defaults),
                                 "default_objective": float(objective(defaults)),
                                 "best_params": dict(best.params),
                                 "best_objective": best.objective}
        except Exception as exc:
            warnings.warn(f"default-objective evaluation failed: {exc}")
    return result
