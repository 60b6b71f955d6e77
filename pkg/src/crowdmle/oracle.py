"""Exhaustive reference searches for certifying the fast estimators on small inputs.

Everything here works item by item over every labelling and scores with its
own likelihood code, so agreement with the bucket-level search is evidence
rather than a tautology.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import xlogy

from .core import Dataset, Mapping
from .errors import CapExceeded, InputError

ORACLE_CAP = 2 * 10**7
RESTRICTIONS = ("all", "reasonable", "bucketized", "diagonally-dominant")
_CHUNK = 1 << 16


@dataclass(frozen=True)
class OracleReport:
    best_mapping: Optional[dict]  # item_id -> rating; None if nothing passed the filter
    best_loglik: float
    search_space_size: int
    restricted: str


def _class_loglik(S: np.ndarray) -> np.ndarray:
    """K x R tallies for one truth class -> max log-likelihood sum_r S_r ln(S_r / N)."""
    N = S.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        return xlogy(S, np.where(N > 0, S / np.where(N > 0, N, 1), 0)).sum(axis=1)


def _dominant_ok(S_by_class: list) -> np.ndarray:
    """Each non-empty class puts at least as much mass on its own rating as on any other."""
    ok = np.ones(S_by_class[0].shape[0], dtype=bool)
    for j, S in enumerate(S_by_class):
        ok &= (S[:, j:j + 1] >= S).all(axis=1)
    return ok


def _labels_chunks(n: int, R: int, total: int):
    # all R^n labellings in lexicographic order, first item most significant
    powers = R ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        yield (idx[:, None] // powers) % R + 1


def _search(C: Sequence[np.ndarray], n: int, R: int, restrict: str, expand=None, cap: int = ORACLE_CAP):
    """Best labelling over R^n (or R^units with ``expand``) candidates.

    ``C`` holds one n x R count block per worker class; the score sums the
    classes.  Returns (labels, loglik, size).
    """
    if restrict not in RESTRICTIONS:
        raise InputError(f"unknown restriction {restrict!r}")
    units = n if expand is None else expand.max() + 1
    size = R ** units
    if size > cap:
        raise CapExceeded(f"{size} labellings exceed the oracle cap {cap}")
    best_labels, best_val = None, -np.inf
    for lab in _labels_chunks(units, R, size):
        if expand is not None:
            lab = lab[:, expand]
        total = np.zeros(lab.shape[0])
        ok = np.ones(lab.shape[0], dtype=bool)
        for block in C:
            S_by_class = [(lab == j).astype(float) @ block for j in range(1, R + 1)]
            total += sum(_class_loglik(S) for S in S_by_class)
            if restrict in ("reasonable", "diagonally-dominant"):
                ok &= _dominant_ok(S_by_class)
        total = np.where(ok, total, np.nan)
        if np.all(np.isnan(total)):
            continue
        i = int(np.nanargmax(total))
        if best_labels is None or total[i] > best_val:
            best_labels, best_val = lab[i].copy(), float(total[i])
    return best_labels, best_val, size


def _report(dataset_ids: Sequence[str], labels, loglik, size, restrict) -> OracleReport:
    mapping = None if labels is None else {i: int(v) for i, v in zip(dataset_ids, labels)}
    return OracleReport(mapping, loglik, size, restrict)


def _bucket_index(keys: Sequence) -> np.ndarray:
    seen = {}
    return np.array([seen.setdefault(tuple(k), len(seen)) for k in keys], dtype=np.int64)


def brute_force_rating(dataset: Dataset, R: Optional[int] = None, restrict: str = "all",
                       cap: int = ORACLE_CAP, within_buckets: bool = False) -> OracleReport:
    """Maximum likelihood over every item-level labelling in ``[1, R]^n``.

    ``bucketized`` only enumerates labellings that are constant on buckets;
    ``reasonable`` and ``diagonally-dominant`` keep labellings whose
    closed-form matrix has each non-empty column peaked on its diagonal.
    ``within_buckets`` adds the bucket constraint to any restriction.
    """
    R = dataset.R if R is None else R
    if R != dataset.R:
        raise InputError(f"R={R} does not match dataset R={dataset.R}")
    C = dataset.count_array().astype(float)
    bucketed = within_buckets or restrict == "bucketized"
    expand = _bucket_index([c for _, c in dataset.items]) if bucketed else None
    if dataset.n == 0:
        return OracleReport({}, 0.0, 1, restrict)
    labels, val, size = _search([C], dataset.n, R, restrict, expand, cap)
    return _report(dataset.item_ids, labels, val, size, restrict)


def brute_force_filter(dataset: Dataset, restrict: str = "reasonable",
                       cap: int = ORACLE_CAP, within_buckets: bool = False) -> OracleReport:
    """All 2^n binary labellings; ``reasonable`` keeps e0, e1 <= 0.5.

    Items may have different numbers of responses.
    """
    if dataset.R != 2:
        raise InputError(f"filtering oracle needs R=2, dataset has R={dataset.R}")
    return brute_force_rating(dataset, 2, restrict, cap, within_buckets)


def brute_force_two_class(items: Sequence, restrict: str = "reasonable",
                          within_buckets: bool = False, cap: int = ORACLE_CAP) -> OracleReport:
    """Two worker classes with separate error rates; items are
    ``(item_id, (y_e, n_e, y_r, n_r))``.

    ``within_buckets`` keeps identical items together on top of ``restrict``.
    """
    if not items:
        return OracleReport({}, 0.0, 1, restrict)
    ids = [i for i, _ in items]
    expert = np.array([[b[1], b[0]] for _, b in items], dtype=float)
    regular = np.array([[b[3], b[2]] for _, b in items], dtype=float)
    expand = _bucket_index([b for _, b in items]) if within_buckets or restrict == "bucketized" else None
    labels, val, size = _search([expert, regular], len(items), 2, restrict, expand, cap)
    return _report(ids, labels, val, size, restrict)


def _binary_loglik(ones0, zeros0, ones1, zeros1, e0, e1):
    return (xlogy(ones0, e0) + xlogy(zeros0, 1 - e0)
            + xlogy(zeros1, e1) + xlogy(ones1, 1 - e1))


def grid_verify_params(buckets: Sequence, f: Mapping, grid_step: float = 0.01):
    """Best likelihood on an (e0, e1) grid over [0, 1]^2 next to the closed form.

    Returns ``(grid_max, closed_form)``; the closed form should never lose.
    """
    if not 0 < grid_step <= 0.1:
        raise InputError("grid_step must be in (0, 0.1]")
    ones0 = zeros0 = ones1 = zeros1 = 0
    for counts, ids in buckets:
        if len(counts) != 2:
            raise InputError("grid check is for binary responses")
        k = len(ids)
        if f[counts] == 1:
            ones0 += counts[0] * k
            zeros0 += counts[1] * k
        else:
            ones1 += counts[0] * k
            zeros1 += counts[1] * k
    e0 = ones0 / (ones0 + zeros0) if ones0 + zeros0 else 0.0
    e1 = zeros1 / (ones1 + zeros1) if ones1 + zeros1 else 0.0
    closed = float(_binary_loglik(ones0, zeros0, ones1, zeros1, e0, e1))
    grid = np.linspace(0.0, 1.0, int(round(1 / grid_step)) + 1)
    g0, g1 = np.meshgrid(grid, grid, indexing="ij")
    with np.errstate(divide="ignore"):
        values = _binary_loglik(ones0, zeros0, ones1, zeros1, g0, g1)
    return float(values.max()), closed


def grid_argmax(buckets: Sequence, f: Mapping, grid_step: float = 0.01) -> tuple:
    """Grid point (e0, e1) attaining the grid maximum."""
    ones0 = zeros0 = ones1 = zeros1 = 0
    for counts, ids in buckets:
        k = len(ids)
        if f[counts] == 1:
            ones0, zeros0 = ones0 + counts[0] * k, zeros0 + counts[1] * k
        else:
            ones1, zeros1 = ones1 + counts[0] * k, zeros1 + counts[1] * k
    grid = np.linspace(0.0, 1.0, int(round(1 / grid_step)) + 1)
    g0, g1 = np.meshgrid(grid, grid, indexing="ij")
    with np.errstate(divide="ignore"):
        values = _binary_loglik(ones0, zeros0, ones1, zeros1, g0, g1)
    i, j = np.unravel_index(np.argmax(values), values.shape)
    return float(grid[i]), float(grid[j])


def all_item_labellings(n: int, R: int):
    """Plain generator used by tests that want a pure-Python cross-check."""
    return itertools.product(range(1, R + 1), repeat=n)
