"""Globally optimal rating estimation over the dominance lattice."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    ConfusionMatrix,
    Dataset,
    Mapping,
    argmax_lex,
    bucketize,
    dominant_mask,
    loglik_from_tallies,
    params_from_tallies,
    profile_logliks,
    tallies,
)
from .errors import InputError
from .poset import (
    BucketPoset,
    build_rating_poset,
    count_monotone_maps,
    dominates,
    monotone_label_array,
)

CHUNK = 200_000


@dataclass(frozen=True)
class RatingSolution:
    mapping: Mapping
    matrix: ConfusionMatrix
    loglik: float
    candidates_evaluated: int


def rating_params(buckets: Sequence, f: Mapping, R: int) -> ConfusionMatrix:
    """Empirical response frequencies per assigned rating (empty columns uniform, flagged)."""
    if not buckets:
        return ConfusionMatrix(np.full((R, R), 1.0 / R), (True,) * R)
    labels = np.array([f[c] for c, _ in buckets])
    p, undefined = params_from_tallies(tallies(buckets), labels, R)
    return ConfusionMatrix(p, undefined)


def rating_likelihood(buckets: Sequence, f: Mapping, R: int) -> float:
    if not buckets:
        return 0.0
    labels = np.array([f[c] for c, _ in buckets])
    T = tallies(buckets)
    p, _ = params_from_tallies(T, labels, R)
    return loglik_from_tallies(T, labels, p)


def populated_poset(buckets: Sequence) -> BucketPoset:
    """Dominance order restricted to the populated buckets.

    The order is the transitive one of the full lattice, decided by the
    cumulative-count criterion, so constraints through empty buckets are kept.
    """
    return BucketPoset.from_order([c for c, _ in buckets], dominates)


def best_monotone(poset: BucketPoset, keys: Sequence, T: np.ndarray, R: int,
                  cap: Optional[int] = None, score=None, admissible=None):
    """Score every monotone labelling of ``poset`` and keep the best admissible one.

    ``score(T, labels, R)`` defaults to the closed-form profile likelihood and
    ``admissible(T, labels, R)`` to the diagonal-peak test.  If no labelling is
    admissible the best unrestricted one is returned.  Result:
    ``(labels over keys, loglik, candidates scored, admissible found)``.
    """
    score = score or profile_logliks
    admissible = admissible or dominant_mask
    order = [poset.index_of(k) for k in keys]
    all_labels = monotone_label_array(poset, R, cap)[:, order]
    best = {True: (None, None), False: (None, None)}
    for start in range(0, all_labels.shape[0], CHUNK):
        chunk = all_labels[start:start + CHUNK].astype(np.int64)
        vals = score(T, chunk, R)
        ok = admissible(T, chunk, R)
        for flag, sel in ((True, ok), (False, np.ones_like(ok))):
            if not sel.any():
                continue
            i = argmax_lex(np.where(sel, vals, -np.inf))
            row, val = best[flag]
            if val is None or vals[i] > val + 1e-12 * max(1.0, abs(val)):
                best[flag] = (chunk[i], float(vals[i]))
    found = best[True][0] is not None
    row, val = best[found]
    return row, val, all_labels.shape[0], found


def rating_opt(dataset: Dataset, cap: Optional[int] = None) -> RatingSolution:
    """Exhaustive search over dominance-consistent bucket mappings.

    Only mappings whose estimated matrix is peaked on the diagonal compete;
    a constant mapping always qualifies, so the search never comes back empty.
    """
    buckets = bucketize(dataset, fixed_m=True)
    R = dataset.R
    if not buckets:
        return RatingSolution(Mapping({}), rating_params([], Mapping({}), R), 0.0, 1)
    keys = [c for c, _ in buckets]
    poset = populated_poset(buckets)
    labels, loglik, count, _ = best_monotone(poset, keys, tallies(buckets), R, cap)
    mapping = Mapping({k: int(v) for k, v in zip(keys, labels)})
    return RatingSolution(mapping, rating_params(buckets, mapping, R), loglik, count)


def count_dominance_consistent(R: int, m: int) -> int:
    """Number of dominance-consistent mappings over all response sets (exact integer)."""
    if R < 2 or m < 1:
        raise InputError(f"need R >= 2 and m >= 1, got R={R}, m={m}")
    return count_monotone_maps(build_rating_poset(R, m), R)


def is_diagonally_dominant(p: ConfusionMatrix) -> bool:
    """Every defined column has its maximum on the diagonal."""
    for j in range(p.R):
        if p.undefined[j]:
            continue
        if p.p[j, j] < p.p[:, j].max():
            return False
    return True
