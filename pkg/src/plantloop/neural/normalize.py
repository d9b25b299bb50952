"""Per-feature z-score normalization with training-split statistics."""

from __future__ import annotations

import numpy as np


class ConstantFeature(ValueError):
    pass


class Normalizer:
    def __init__(self, mean: np.ndarray, std: np.ndarray, feature_names=None):
        self.mean = np.asarray(mean, dtype=float)
        self.std = np.asarray(std, dtype=float)
        self.feature_names = list(feature_names) if feature_names else None
        if np.any(self.std <= 0):
            raise ConstantFeature("standard deviation must be positive")

    @staticmethod
    def fit(data: np.ndarray, feature_names=None) -> "Normalizer":
        """data: (..., n_features); statistics over all leading axes."""
        flat = data.reshape(-1, data.shape[-1])
        mean = flat.mean(axis=0)
        std = flat.std(axis=0)
        # Constant up to numerical jitter counts as constant.
        floor = 1e-10 * np.maximum(1.0, np.abs(mean))
        if np.any(std < floor):
            bad = [i for i, s in enumerate(std) if s < floor[i]]
            names = ([feature_names[i] for i in bad] if feature_names else bad)
            raise ConstantFeature(f"constant feature(s): {names}")
        return Normalizer(mean, std, feature_names)

    def transform(self, data: np.ndarray) -> np.ndarray:
        return (data - self.mean) / self.std

    def inverse(self, data: np.ndarray) -> np.ndarray:
        return data * self.std + self.mean

    def subset(self, indices) -> "Normalizer":
        names = ([self.feature_names[i] for i in indices]
                 if self.feature_names else None)
        return Normalizer(self.mean[indices], self.std[indices], names)

    def to_json(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist(),
                "feature_names": self.feature_names}

    @staticmethod
    def from_json(d: dict) -> "Normalizer":
        return Normalizer(np.array(d["mean"]), np.array(d["std"]),
                          d.get("feature_names"))
