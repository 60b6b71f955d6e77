"""Accuracy of predicted labels and distance between confusion matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping as TMapping

import numpy as np

from .core import ConfusionMatrix
from .errors import InputError


@dataclass(frozen=True)
class MetricReport:
    fraction_incorrect: float
    distance_weighted: float
    emd_score: float
    jsd_score: float


def _aligned(pred: TMapping, truth: TMapping):
    if set(pred) != set(truth):
        raise InputError("prediction and truth cover different items")
    keys = sorted(truth)
    return np.array([pred[k] for k in keys]), np.array([truth[k] for k in keys])


def fraction_incorrect(pred: TMapping, truth: TMapping) -> float:
    a, b = _aligned(pred, truth)
    return float(np.mean(a != b)) if len(a) else 0.0


def distance_weighted_score(pred: TMapping, truth: TMapping, R: int = None) -> float:
    """Mean absolute rating error."""
    a, b = _aligned(pred, truth)
    if R is not None and len(a) and (min(a.min(), b.min()) < 1 or max(a.max(), b.max()) > R):
        raise InputError(f"ratings outside [1, {R}]")
    return float(np.mean(np.abs(a - b))) if len(a) else 0.0


def _columns(p, q):
    p = p.p if isinstance(p, ConfusionMatrix) else np.asarray(p, dtype=float)
    q = q.p if isinstance(q, ConfusionMatrix) else np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise InputError(f"matrix shapes differ: {p.shape} vs {q.shape}")
    return p, q


def column_emd(a: np.ndarray, b: np.ndarray) -> float:
    """Earth mover's distance on ratings 1..R with unit spacing, divided by R-1."""
    diff = np.cumsum(a - b)[:-1]
    return float(np.abs(diff).sum() / (len(a) - 1))


def column_jsd(a: np.ndarray, b: np.ndarray) -> float:
    """Jensen-Shannon divergence in bits."""
    mid = 0.5 * (a + b)

    def kl(x):
        nz = x > 0
        return float(np.sum(x[nz] * np.log2(x[nz] / mid[nz])))

    return max(0.0, 0.5 * kl(a) + 0.5 * kl(b))


def emd_score(p, q) -> float:
    p, q = _columns(p, q)
    return sum(column_emd(p[:, j], q[:, j]) for j in range(p.shape[1]))


def jsd_score(p, q) -> float:
    p, q = _columns(p, q)
    return sum(column_jsd(p[:, j], q[:, j]) for j in range(p.shape[1]))


def evaluate(pred: TMapping, truth: TMapping, p_pred, p_true) -> MetricReport:
    return MetricReport(
        fraction_incorrect(pred, truth),
        distance_weighted_score(pred, truth),
        emd_score(p_pred, p_true),
        jsd_score(p_pred, p_true),
    )
