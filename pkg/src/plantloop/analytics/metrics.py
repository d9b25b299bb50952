"""Error metrics and correlation."""

from __future__ import annotations

import numpy as np


class EmptyInput(ValueError):
    pass


class ZeroVariance(ValueError):
    pass


def mse(predictions, truths) -> float:
    p = np.asarray(predictions, dtype=float).ravel()
    y = np.asarray(truths, dtype=float).ravel()
    if p.size == 0 or p.size != y.size:
        raise EmptyInput("series must be non-empty and of equal length")
    return float(np.mean((p - y) ** 2))


def rmse(predictions, truths) -> float:
    return float(np.sqrt(mse(predictions, truths)))


def pearson(x, y) -> float:
    """Pearson correlation, population convention."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size or x.size < 2:
        raise EmptyInput("series must have equal length >= 2")
    xd = x - x.mean()
    yd = y - y.mean()
    sx = np.sqrt(np.mean(xd ** 2))
    sy = np.sqrt(np.mean(yd ** 2))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVariance("constant series has no correlation")
    rho = float(np.mean(xd * yd) / (sx * sy))
    return min(1.0, max(-1.0, rho))
