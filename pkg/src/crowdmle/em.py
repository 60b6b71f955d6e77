"""Hard-assignment EM baseline and its standard initialisations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    ConfusionMatrix,
    Dataset,
    Mapping,
    xlogy,
    bucketize,
    loglik_from_tallies,
    params_from_tallies,
    tallies,
)
from .errors import InputError

MAX_ITER = 100
TOL = 1e-9


@dataclass(frozen=True)
class EmInit:
    name: str
    matrix: ConfusionMatrix


@dataclass(frozen=True)
class EmResult:
    mapping: Mapping
    matrix: ConfusionMatrix
    loglik: float
    iterations: int
    converged: bool
    history: tuple = field(default=(), compare=False)
    init: str = ""


# Rating presets for R = 3.  The third matrix is printed with a middle column
# summing to 1.01; its last entry is taken as 0.33 so the column is stochastic.
_RATING3 = {
    "EM1": [[0.6, 0.33, 0.07], [0.33, 0.34, 0.33], [0.07, 0.33, 0.6]],
    "EM2": [[0.34, 0.33, 0.33], [0.33, 0.34, 0.33], [0.33, 0.33, 0.34]],
    "EM3": [[0.07, 0.33, 0.6], [0.33, 0.34, 0.33], [0.6, 0.33, 0.07]],
}


def filter_presets() -> list:
    return [
        EmInit(f"EM{k}", ConfusionMatrix.from_error_rates(e, e))
        for k, e in ((1, 0.25), (2, 0.5), (3, 0.75))
    ]


def _peaked(R: int, anti: bool) -> np.ndarray:
    p = np.full((R, R), 0.4 / (R - 1))
    for j in range(R):
        p[(R - 1 - j) if anti else j, j] = 0.6
    return p


def rating_presets(R: int) -> list:
    """Low-error, uniform and adversarial starting matrices."""
    if R == 2:
        return filter_presets()
    if R == 3:
        return [EmInit(name, ConfusionMatrix(np.array(p))) for name, p in _RATING3.items()]
    return [
        EmInit("EM1", ConfusionMatrix(_peaked(R, anti=False))),
        EmInit("EM2", ConfusionMatrix(np.full((R, R), 1.0 / R))),
        EmInit("EM3", ConfusionMatrix(_peaked(R, anti=True))),
    ]


def _assign(T: np.ndarray, p: np.ndarray) -> np.ndarray:
    # per-bucket log-likelihood of each candidate rating; argmax keeps the lowest on ties
    scores = np.stack([xlogy(T, np.broadcast_to(p[:, j], T.shape)).sum(axis=1)
                       for j in range(p.shape[1])], axis=1)
    return np.argmax(scores, axis=1) + 1


def em_run(dataset: Dataset, init: EmInit, max_iter: int = MAX_ITER, tol: float = TOL) -> EmResult:
    """Alternate hard assignment and closed-form re-estimation until the
    log-likelihood gain drops below ``tol``."""
    if max_iter < 1 or tol <= 0:
        raise InputError("need max_iter >= 1 and tol > 0")
    R = dataset.R
    if init.matrix.R != R:
        raise InputError(f"initial matrix is {init.matrix.R}x{init.matrix.R}, dataset has R={R}")
    buckets = bucketize(dataset, fixed_m=False)
    keys = [c for c, _ in buckets]
    if not keys:
        return EmResult(Mapping({}), init.matrix, 0.0, 0, True, (), init.name)
    T = tallies(buckets)
    p = init.matrix.p
    undefined = init.matrix.undefined
    history = []
    labels = None
    converged = False
    for it in range(1, max_iter + 1):
        new_labels = _assign(T, p)
        p, undefined = params_from_tallies(T, new_labels, R)
        ll = loglik_from_tallies(T, new_labels, p)
        same = labels is not None and np.array_equal(labels, new_labels)
        labels = new_labels
        history.append(ll)
        if same or (len(history) > 1 and ll - history[-2] < tol):
            converged = True
            break
    mapping = Mapping({k: int(v) for k, v in zip(keys, labels)})
    return EmResult(mapping, ConfusionMatrix(p, undefined), history[-1], len(history),
                    converged, tuple(history), init.name)


def em_star(dataset: Dataset, inits: Sequence[EmInit] = (), max_iter: int = MAX_ITER,
            tol: float = TOL) -> EmResult:
    """Best-likelihood run over several initialisations; ties keep the earlier init."""
    inits = list(inits) or rating_presets(dataset.R)
    best = None
    for init in inits:
        result = em_run(dataset, init, max_iter, tol)
        if best is None or result.loglik > best.loglik:
            best = result
    return best
