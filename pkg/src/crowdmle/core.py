"""Domain types, bucketization and likelihood evaluation.

Response counts are plain tuples ordered from the highest rating down,
``(v_R, ..., v_1)``.  Filtering is stored as ``R = 2`` with rating 1 meaning
"0" and rating 2 meaning "1", so a filtering response set reads
``(#ones, #zeros)``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping as TMapping, Optional, Sequence

import numpy as np

from .errors import InputError

ResponseCounts = tuple  # (v_R, ..., v_1); see module docstring
NEG_INF = float("-inf")


def as_counts(values: Iterable[int]) -> ResponseCounts:
    counts = tuple(int(v) for v in values)
    if any(v < 0 for v in counts):
        raise InputError(f"negative response count in {counts}")
    return counts


def counts_from_ratings(ratings: Iterable[int], R: int) -> ResponseCounts:
    """Tally individual ratings in ``1..R`` into a high-to-low count tuple."""
    tally = [0] * R
    for r in ratings:
        if not 1 <= r <= R:
            raise InputError(f"rating {r} outside [1, {R}]")
        tally[R - r] += 1
    return tuple(tally)


@dataclass
class Dataset:
    R: int
    items: list  # [(item_id, ResponseCounts)]
    truth: Optional[dict] = None  # item_id -> rating
    raw: Optional[list] = None  # [(item_id, worker_id, rating)]
    fixed_m: bool = True

    def __post_init__(self):
        if self.R < 2:
            raise InputError(f"R must be >= 2, got {self.R}")
        seen = set()
        for item_id, counts in self.items:
            if item_id in seen:
                raise InputError(f"duplicate item id {item_id!r}")
            seen.add(item_id)
            if len(counts) != self.R or any(v < 0 for v in counts):
                raise InputError(f"item {item_id!r}: bad response counts {counts}")
        for item_id, r in (self.truth or {}).items():
            if not 1 <= r <= self.R:
                raise InputError(f"truth for {item_id!r} is {r}, outside [1, {self.R}]")
        if self.raw is not None:
            by_item = defaultdict(list)
            for item_id, _, r in self.raw:
                by_item[item_id].append(r)
            for item_id, counts in self.items:
                if counts_from_ratings(by_item.get(item_id, ()), self.R) != tuple(counts):
                    raise InputError(f"item {item_id!r}: raw rows disagree with counts")

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def item_ids(self) -> list:
        return [item_id for item_id, _ in self.items]

    @property
    def m(self) -> Optional[int]:
        """Common response total, or None for an empty / variable dataset."""
        totals = {sum(c) for _, c in self.items}
        return totals.pop() if len(totals) == 1 else None

    def count_array(self) -> np.ndarray:
        """n x R array, column r-1 holding the number of rating-r responses."""
        if not self.items:
            return np.zeros((0, self.R), dtype=np.int64)
        return np.array([c[::-1] for _, c in self.items], dtype=np.int64)

    def subset(self, item_ids: Sequence[str]) -> "Dataset":
        lookup = dict(self.items)
        truth = None if self.truth is None else {i: self.truth[i] for i in item_ids}
        return Dataset(self.R, [(i, lookup[i]) for i in item_ids], truth, None, self.fixed_m)


@dataclass(frozen=True)
class Mapping:
    """Rating assigned to every bucket (distinct response set)."""

    assignment: dict = field(hash=False)

    def __getitem__(self, counts):
        return self.assignment[tuple(counts)]

    def item_labels(self, dataset: Dataset) -> dict:
        return {item_id: self.assignment[tuple(c)] for item_id, c in dataset.items}

    def binary(self) -> dict:
        """Filtering view: rating 2 -> 1, rating 1 -> 0."""
        return {k: v - 1 for k, v in self.assignment.items()}

    def values_in(self, keys: Sequence) -> tuple:
        return tuple(self.assignment[tuple(k)] for k in keys)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Column-stochastic R x R matrix; ``p[i-1, j-1]`` = Pr(answer i | truth j)."""

    p: np.ndarray = field(hash=False)
    undefined: tuple = ()

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] < 2:
            raise InputError(f"confusion matrix must be square with R >= 2, got {p.shape}")
        if np.any(p < 0) or np.any(p > 1):
            raise InputError("confusion matrix entries must lie in [0, 1]")
        if np.any(np.abs(p.sum(axis=0) - 1.0) > 1e-12):
            raise InputError(f"columns must sum to 1, got {p.sum(axis=0)}")
        object.__setattr__(self, "p", p)
        if not self.undefined:
            object.__setattr__(self, "undefined", (False,) * p.shape[0])

    @property
    def R(self) -> int:
        return self.p.shape[0]

    def entry(self, i: int, j: int) -> float:
        return float(self.p[i - 1, j - 1])

    @property
    def e0(self) -> float:
        """False-positive rate for R = 2."""
        return float(self.p[1, 0])

    @property
    def e1(self) -> float:
        """False-negative rate for R = 2."""
        return float(self.p[0, 1])

    @classmethod
    def from_error_rates(cls, e0: float, e1: float, undefined=(False, False)):
        return cls(np.array([[1 - e0, e1], [e0, 1 - e1]]), tuple(undefined))

    def rows(self) -> list:
        return self.p.tolist()


def bucketize(dataset: Dataset, fixed_m: Optional[bool] = None) -> list:
    """Group items by identical response counts.

    Returns ``[(counts, [item_id, ...]), ...]`` sorted lexicographically
    descending on ``(v_R, ..., v_1)``, which is also a topological order of
    the dominance relation.
    """
    if fixed_m is None:
        fixed_m = dataset.fixed_m
    groups = defaultdict(list)
    m = None
    for item_id, counts in dataset.items:
        counts = tuple(counts)
        if fixed_m:
            total = sum(counts)
            if m is None:
                m = total
            elif total != m:
                raise InputError(
                    f"item {item_id!r} has {total} responses, expected {m} (fixed-m mode)"
                )
        groups[counts].append(item_id)
    return sorted(groups.items(), key=lambda kv: kv[0], reverse=True)


def tallies(buckets: Sequence) -> np.ndarray:
    """B x R matrix of response totals per bucket, rating r in column r-1."""
    if not buckets:
        return np.zeros((0, 0))
    return np.array([np.asarray(c[::-1], dtype=float) * len(ids) for c, ids in buckets])


def xlogy(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # x*log(y) with 0*log(0) = 0 and x>0, y=0 -> -inf
    with np.errstate(divide="ignore", invalid="ignore"):
        out = x * np.log(y)
    return np.where(x == 0, 0.0, out)


def loglik_from_tallies(T: np.ndarray, labels: np.ndarray, p: np.ndarray) -> float:
    """sum_b sum_r T[b, r] * ln p[r, labels[b] - 1]."""
    if T.size == 0:
        return 0.0
    cols = p[:, np.asarray(labels) - 1].T  # B x R
    return float(xlogy(T, cols).sum())


def params_from_tallies(T: np.ndarray, labels: np.ndarray, R: int):
    """Closed-form per-column response frequencies.

    Columns with no assigned responses come back uniform and flagged.
    """
    labels = np.asarray(labels)
    S = np.zeros((R, R))
    for j in range(1, R + 1):
        mask = labels == j
        if mask.any():
            S[:, j - 1] = T[mask].sum(axis=0)
    totals = S.sum(axis=0)
    undefined = tuple(bool(t == 0) for t in totals)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, S / np.where(totals > 0, totals, 1.0), 1.0 / R)
    return p, undefined


def profile_logliks(T: np.ndarray, labels: np.ndarray, R: int) -> np.ndarray:
    """Log-likelihood of each candidate labelling under its own closed-form matrix.

    ``labels`` is K x B (one candidate per row).  Each column j contributes
    ``sum_r S_rj ln(S_rj / N_j)`` with S the tallies of buckets labelled j.
    """
    labels = np.atleast_2d(labels)
    out = np.zeros(labels.shape[0])
    if T.size == 0:
        return out
    for j in range(1, R + 1):
        S = (labels == j).astype(float) @ T  # K x R
        N = S.sum(axis=1)
        out += xlogy(S, S).sum(axis=1) - xlogy(N, N)
    return out


def dominant_mask(T: np.ndarray, labels: np.ndarray, R: int) -> np.ndarray:
    """Which candidate labellings give a closed-form matrix peaked on its diagonal.

    Column j passes when no rating collects more responses than j among
    buckets labelled j; empty columns pass.  At R = 2 this is exactly
    "both error rates at most 0.5".
    """
    labels = np.atleast_2d(labels)
    ok = np.ones(labels.shape[0], dtype=bool)
    if T.size == 0:
        return ok
    for j in range(1, R + 1):
        S = (labels == j).astype(float) @ T
        ok &= S[:, j - 1] >= S.max(axis=1)
    return ok


def log_likelihood_given_matrix(dataset: Dataset, f: Mapping, p: ConfusionMatrix) -> float:
    """Natural-log likelihood of the responses when truth is ``f`` and workers follow ``p``."""
    if p.R != dataset.R:
        raise InputError(f"matrix is {p.R}x{p.R} but dataset has R={dataset.R}")
    buckets = bucketize(dataset, fixed_m=False)
    if not buckets:
        return 0.0
    labels = np.array([f[c] for c, _ in buckets])
    return loglik_from_tallies(tallies(buckets), labels, p.p)


def argmax_lex(logliks: np.ndarray, rel_tol: float = 1e-12) -> int:
    """Index of the first candidate within tolerance of the maximum.

    Candidates are enumerated in lexicographic order of their bucket
    assignment, so the first near-maximal one is the lexicographically
    smallest.
    """
    best = np.max(logliks)
    if best == NEG_INF:
        return 0
    tol = rel_tol * max(1.0, abs(best))
    return int(np.flatnonzero(logliks >= best - tol)[0])


def majority_vote(dataset: Dataset) -> Mapping:
    """Most frequent rating per bucket; ties go to the lower rating."""
    assignment = {}
    for counts, _ in bucketize(dataset, fixed_m=False):
        low_to_high = counts[::-1]
        assignment[counts] = int(np.argmax(low_to_high)) + 1
    return Mapping(assignment)


def truth_mapping(dataset: Dataset) -> dict:
    if dataset.truth is None:
        raise InputError("dataset has no ground truth")
    return dict(dataset.truth)


def items_from_labels(dataset: Dataset, labels: TMapping) -> Mapping:
    """Bucket-level mapping from item-level labels; raises if a bucket is split."""
    assignment = {}
    for item_id, counts in dataset.items:
        counts = tuple(counts)
        v = labels[item_id]
        if assignment.setdefault(counts, v) != v:
            raise InputError(f"labels split bucket {counts}")
    return Mapping(assignment)
