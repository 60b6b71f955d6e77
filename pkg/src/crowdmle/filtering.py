"""Globally optimal filtering (yes/no) estimation by cut-point enumeration."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    ConfusionMatrix,
    Dataset,
    Mapping,
    argmax_lex,
    bucketize,
    dominant_mask,
    profile_logliks,
    tallies,
)
from .errors import InputError

# internal ratings: 1 <-> "0", 2 <-> "1"
NO, YES = 1, 2


@dataclass(frozen=True)
class FilterParams:
    e0: float  # Pr(worker says 1 | truth 0)
    e1: float  # Pr(worker says 0 | truth 1)
    defined_e0: bool = True
    defined_e1: bool = True

    def matrix(self) -> ConfusionMatrix:
        return ConfusionMatrix.from_error_rates(
            self.e0, self.e1, (not self.defined_e0, not self.defined_e1)
        )


@dataclass(frozen=True)
class FilterSolution:
    mapping: Mapping
    params: FilterParams
    loglik: float
    candidates_evaluated: int

    def __iter__(self):
        return iter((self.mapping, self.params, self.loglik))


def filter_params(buckets: Sequence, f: Mapping) -> FilterParams:
    """Closed-form maximum-likelihood error rates for a fixed mapping.

    e0 is the share of "1" answers among items mapped to 0, e1 the share of
    "0" answers among items mapped to 1.  A rate with no supporting items is
    reported as 0 and flagged undefined.
    """
    ones = {NO: 0, YES: 0}
    total = {NO: 0, YES: 0}
    for counts, ids in buckets:
        if len(counts) != 2:
            raise InputError(f"filtering needs binary response counts, got {counts}")
        label = f[counts]
        ones[label] += counts[0] * len(ids)
        total[label] += sum(counts) * len(ids)
    e0 = ones[NO] / total[NO] if total[NO] else 0.0
    e1 = (total[YES] - ones[YES]) / total[YES] if total[YES] else 0.0
    return FilterParams(e0, e1, total[NO] > 0, total[YES] > 0)


def is_reasonable(f: Mapping, buckets: Sequence) -> bool:
    """Both error rates at most 0.5 (undefined rates count as 0)."""
    params = filter_params(buckets, f)
    return params.e0 <= 0.5 and params.e1 <= 0.5


def cut_point_mapping(c: int, m: int) -> Mapping:
    """Buckets (m,0) ... (m-c+1, c-1) map to "1", the rest to "0"."""
    if not 0 <= c <= m + 1:
        raise InputError(f"cut-point {c} outside [0, {m + 1}]")
    return Mapping({(m - j, j): (YES if j < c else NO) for j in range(m + 1)})


def _check_binary(dataset: Dataset) -> int:
    if dataset.R != 2:
        raise InputError(f"filtering needs R=2, dataset has R={dataset.R}")
    return dataset.m or 0


def filter_opt(dataset: Dataset) -> FilterSolution:
    """Maximum-likelihood mapping and error rates over the m+2 cut-point mappings.

    Only reasonable cut-points (both error rates <= 0.5) can win; the all-0 or
    all-1 mapping always qualifies.  The result is then a global maximum over
    every reasonable mapping.  Ties go to the lexicographically smallest
    bucket assignment.
    """
    _check_binary(dataset)
    buckets = bucketize(dataset, fixed_m=True)
    m = sum(buckets[0][0]) if buckets else 0
    T = tallies(buckets)
    keys = [c for c, _ in buckets]
    # c = 0 .. m+1 gives assignments in increasing lexicographic order
    candidates = [cut_point_mapping(c, m) for c in range(m + 2)]
    labels = np.array([[f[k] for k in keys] for f in candidates], dtype=np.int64)
    if not keys:
        labels = np.zeros((m + 2, 0), dtype=np.int64)
    scores = profile_logliks(T, labels, 2) if keys else np.zeros(m + 2)
    # some cut-points imply worse-than-random workers; they are scored but never chosen
    ok = dominant_mask(T, labels, 2) if keys else np.ones(m + 2, dtype=bool)
    best = argmax_lex(np.where(ok, scores, -np.inf))
    mapping = Mapping({k: int(v) for k, v in zip(keys, labels[best])})
    return FilterSolution(mapping, filter_params(buckets, mapping), float(scores[best]), m + 2)
