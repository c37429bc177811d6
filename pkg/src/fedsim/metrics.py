"""Example-based multilabel metrics.

For predicted set Z and true set Y of one sample:

    jaccard          |Y & Z| / |Y | Z|
    exact match      1 if Z == Y else 0
    f1               2 |Y & Z| / (|Y| + |Z|)

All three average over samples. A sample where both sets are empty
counts as fully correct (contributes 1), so an all-negative prediction
on an unlabeled sample is not penalized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def binarize(probs: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """Per-label hard decisions: 1 where prob >= threshold."""
    return (np.asarray(probs) >= threshold).astype(np.uint8)


@dataclass(frozen=True)
class PredictionSet:
    probs: np.ndarray
    threshold: float = 0.5

    @property
    def binarized(self) -> np.ndarray:
        return binarize(self.probs, self.threshold)


def _as_binary_pair(preds, truth):
    z = np.asarray(preds)
    y = np.asarray(truth)
    if z.shape != y.shape or z.ndim != 2:
        raise ValueError(f"prediction/truth shapes differ: {z.shape} vs {y.shape}")
    return z.astype(bool), y.astype(bool)


def simple_accuracy(preds, truth) -> float:
    """Mean per-sample Jaccard overlap between predicted and true label sets."""
    z, y = _as_binary_pair(preds, truth)
    inter = (z & y).sum(axis=1)
    union = (z | y).sum(axis=1)
    scores = np.where(union > 0, inter / np.maximum(union, 1), 1.0)
    return float(scores.mean())


def classification_accuracy(preds, truth) -> float:
    """Fraction of samples whose predicted label set matches exactly."""
    z, y = _as_binary_pair(preds, truth)
    return float((z == y).all(axis=1).mean())


def f1_score(preds, truth) -> float:
    """Mean per-sample harmonic overlap 2|Y&Z| / (|Y| + |Z|)."""
    z, y = _as_binary_pair(preds, truth)
    inter = (z & y).sum(axis=1)
    total = z.sum(axis=1) + y.sum(axis=1)
    scores = np.where(total > 0, 2.0 * inter / np.maximum(total, 1), 1.0)
    return float(scores.mean())
