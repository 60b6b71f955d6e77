"""Synthetic instances: ground truth, worker matrices and simulated responses."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ConfusionMatrix, Dataset, counts_from_ratings
from .errors import ConfigError, InputError

MATRIX_MODES = ("better-than-random", "diagonally-dominant", "explicit")


def _rng(seed: int, *path: int) -> np.random.Generator:
    # Philox is counter based; each (seed, path) names an independent stream
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *path])))


# stream ids
_TRUTH, _MATRIX, _RESPONSES, _SAMPLE = 0, 1, 2, 3


@dataclass(frozen=True)
class SynthConfig:
    n: int
    R: int = 2
    m: int = 3
    selectivity: tuple = (0.5, 0.5)
    matrix_mode: str = "better-than-random"
    seed: int = 0
    matrix: Optional[ConfusionMatrix] = None

    def __post_init__(self):
        sel = self.selectivity
        if np.isscalar(sel):
            sel = (1.0 - float(sel), float(sel))
        sel = tuple(float(s) for s in sel)
        object.__setattr__(self, "selectivity", sel)
        if self.R < 2 or self.n < 0 or self.m < 0:
            raise ConfigError(f"invalid sizes n={self.n}, R={self.R}, m={self.m}")
        if len(sel) != self.R or any(s < 0 for s in sel) or abs(sum(sel) - 1) > 1e-9:
            raise ConfigError(f"selectivity {sel} is not a distribution over {self.R} ratings")
        if self.matrix_mode not in MATRIX_MODES:
            raise ConfigError(f"unknown matrix mode {self.matrix_mode!r}")
        if self.matrix_mode == "explicit" and (self.matrix is None or self.matrix.R != self.R):
            raise ConfigError("explicit matrix mode needs an R x R matrix")


def item_ids(n: int) -> list:
    width = max(1, len(str(n - 1)))
    return [f"i{k:0{width}d}" for k in range(n)]


def gen_truth(config: SynthConfig) -> dict:
    """i.i.d. true ratings drawn from the selectivity vector."""
    rng = _rng(config.seed, _TRUTH)
    draws = rng.choice(config.R, size=config.n, p=np.asarray(config.selectivity)) + 1
    return dict(zip(item_ids(config.n), (int(d) for d in draws)))


def gen_matrix(config: SynthConfig) -> ConfusionMatrix:
    """Worker matrix for the configured mode.

    Binary better-than-random draws e0, e1 uniformly from [0, 0.5].  Otherwise
    each column is a uniform point on the simplex whose largest entry is
    swapped onto the diagonal.
    """
    if config.matrix_mode == "explicit":
        return config.matrix
    rng = _rng(config.seed, _MATRIX)
    R = config.R
    if R == 2 and config.matrix_mode == "better-than-random":
        e0, e1 = rng.uniform(0.0, 0.5, size=2)
        return ConfusionMatrix.from_error_rates(float(e0), float(e1))
    p = np.empty((R, R))
    for j in range(R):
        while True:
            col = rng.dirichlet(np.ones(R))
            top = int(np.argmax(col))
            col[[j, top]] = col[[top, j]]
            if np.all(col[j] > np.delete(col, j)):
                break
        col[j] = 1.0 - (col.sum() - col[j])
        p[:, j] = col
    return ConfusionMatrix(p)


def simulate_responses(truth: dict, matrix: ConfusionMatrix, m: int, seed: int,
                       fixed_m: bool = True) -> Dataset:
    """m independent categorical answers per item from the truth's column."""
    if m < 0:
        raise InputError("m must be >= 0")
    if m == 0 and fixed_m:
        raise InputError("m = 0 is only meaningful with variable response counts")
    R = matrix.R
    ids = list(truth)
    rng = _rng(seed, _RESPONSES)
    if ids:
        cols = matrix.p[:, [truth[i] - 1 for i in ids]].T
        cols = cols / cols.sum(axis=1, keepdims=True)
        counts = rng.multinomial(m, cols)  # n x R, low to high
    else:
        counts = np.zeros((0, R), dtype=np.int64)
    items = [(i, tuple(int(v) for v in row[::-1])) for i, row in zip(ids, counts)]
    return Dataset(R, items, dict(truth), None, fixed_m)


def generate(config: SynthConfig):
    """Truth, matrix and responses for one trial: ``(dataset, matrix)``."""
    truth = gen_truth(config)
    matrix = gen_matrix(config)
    return simulate_responses(truth, matrix, config.m, config.seed), matrix


def subsample_responses(dataset: Dataset, m: int, seed: int) -> Dataset:
    """Keep m raw responses per item, chosen uniformly without replacement."""
    if dataset.raw is None:
        raise InputError("subsampling needs raw per-worker rows")
    rows = defaultdict(list)
    for row in dataset.raw:
        rows[row[0]].append(row)
    rng = _rng(seed, _SAMPLE)
    items, raw = [], []
    for item_id in dataset.item_ids:
        pool = rows[item_id]
        if len(pool) < m:
            raise InputError(f"item {item_id!r} has {len(pool)} responses, fewer than {m}")
        picked = sorted(rng.choice(len(pool), size=m, replace=False))
        chosen = [pool[k] for k in picked]
        raw.extend(chosen)
        items.append((item_id, counts_from_ratings((r for _, _, r in chosen), dataset.R)))
    truth = None if dataset.truth is None else dict(dataset.truth)
    return Dataset(dataset.R, items, truth, raw, True)


def dataset_from_raw(rows: Sequence, R: int, truth: Optional[dict] = None,
                     fixed_m: bool = True) -> Dataset:
    """Aggregate ``(item_id, worker_id, rating)`` rows; items keep first-seen order."""
    by_item = defaultdict(list)
    for item_id, _, r in rows:
        by_item[item_id].append(r)
    items = [(i, counts_from_ratings(rs, R)) for i, rs in by_item.items()]
    return Dataset(R, items, truth, list(rows), fixed_m)


def simulate_variable(truth: dict, matrix: ConfusionMatrix, m_max: int, seed: int) -> Dataset:
    """Like ``simulate_responses`` but each item gets a uniform total in [1, m_max]."""
    if m_max < 1:
        raise InputError("m_max must be >= 1")
    ids = list(truth)
    rng = _rng(seed, _RESPONSES, 1)
    totals = rng.integers(1, m_max + 1, size=len(ids))
    items = []
    if ids:
        cols = matrix.p[:, [truth[i] - 1 for i in ids]].T
        counts = rng.multinomial(totals, cols / cols.sum(axis=1, keepdims=True))
        items = [(i, tuple(int(v) for v in row[::-1])) for i, row in zip(ids, counts)]
    return Dataset(matrix.R, items, dict(truth), None, fixed_m=False)


def simulate_two_class(truth: dict, expert: ConfusionMatrix, regular: ConfusionMatrix,
                       m_e: int, m_r: int, seed: int):
    """Binary answers from m_e experts and m_r regular workers per item."""
    from .extensions import TwoClassDataset

    ids = list(truth)
    blocks = []
    for k, (matrix, m) in enumerate(((expert, m_e), (regular, m_r))):
        rng = _rng(seed, _RESPONSES, 2, k)
        cols = matrix.p[:, [truth[i] - 1 for i in ids]].T if ids else np.zeros((0, 2))
        blocks.append(rng.multinomial(m, cols) if ids else np.zeros((0, 2), dtype=np.int64))
    # multinomial columns are (no, yes); buckets store (yes, no)
    items = [(i, (int(e[1]), int(e[0]), int(r[1]), int(r[0])))
             for i, e, r in zip(ids, blocks[0], blocks[1])]
    return TwoClassDataset(items, m_e, m_r, dict(truth))
