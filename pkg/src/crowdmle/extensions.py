"""Variable numbers of responses per item, and expert/regular worker classes.

Both are binary problems solved by enumerating monotone 0/1 labellings of a
bucket poset.  Ratings follow the filtering convention: 1 is "0", 2 is "1".
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ConfusionMatrix, Dataset, Mapping, bucketize, dominant_mask, profile_logliks
from .errors import CapExceeded, InputError
from .filtering import FilterParams, FilterSolution, filter_params
from .poset import DEFAULT_NODE_CAP, BucketPoset, count_monotone_maps
from .rating import best_monotone

EXPERT, REGULAR = "expert", "regular"


# -- variable response counts ------------------------------------------------

def variable_nodes(m_max: int) -> list:
    """(ones, zeros) with ones + zeros <= m_max."""
    return [(i, j) for i in range(m_max, -1, -1) for j in range(0, m_max - i + 1)]


def build_variable_poset(m_max: int) -> BucketPoset:
    """(i, j) covers (i-1, j) and (i, j+1)."""
    if m_max < 1:
        raise InputError("m_max must be >= 1")
    nodes = variable_nodes(m_max)
    node_set = set(nodes)
    edges = []
    for i, j in nodes:
        if i >= 1:
            edges.append(((i, j), (i - 1, j)))
        if (i, j + 1) in node_set:
            edges.append(((i, j), (i, j + 1)))
    return BucketPoset(nodes, edges)


def variable_opt(dataset: Dataset, m_max: Optional[int] = None,
                 cap: Optional[int] = None) -> FilterSolution:
    """Best reasonable monotone 0/1 labelling of the variable-count poset.

    Error rates use each item's own number of responses.
    """
    if dataset.R != 2:
        raise InputError(f"variable-count mode is binary, dataset has R={dataset.R}")
    buckets = bucketize(dataset, fixed_m=False)
    if not buckets:
        return FilterSolution(Mapping({}), FilterParams(0.0, 0.0, False, False), 0.0, 1)
    largest = max(sum(c) for c, _ in buckets)
    m_max = largest if m_max is None else m_max
    if largest > m_max:
        raise InputError(f"an item has {largest} responses, more than m_max={m_max}")
    keys = [c for c, _ in buckets]
    full = build_variable_poset(max(m_max, 1))
    poset = full.induced(keys)
    T = np.array([np.asarray(c[::-1], dtype=float) * len(ids) for c, ids in buckets])
    labels, loglik, count, _ = best_monotone(poset, keys, T, 2, cap)
    mapping = Mapping({k: int(v) for k, v in zip(keys, labels)})
    return FilterSolution(mapping, filter_params(buckets, mapping), loglik, count)


def count_variable_boundaries(m_max: int) -> tuple:
    """``(boundary formula 3 * 2**m - 1, exact number of monotone labellings)``."""
    if m_max < 1:
        raise InputError("m_max must be >= 1")
    return 3 * 2**m_max - 1, count_monotone_maps(build_variable_poset(m_max), 2)


# -- two worker classes ------------------------------------------------------

@dataclass
class TwoClassDataset:
    """Items with (expert yes, expert no, regular yes, regular no) counts."""

    items: list  # [(item_id, (y_e, n_e, y_r, n_r))]
    m_e: int
    m_r: int
    truth: Optional[dict] = None

    def __post_init__(self):
        for item_id, b in self.items:
            if len(b) != 4 or any(v < 0 for v in b):
                raise InputError(f"item {item_id!r}: bad two-class counts {b}")
            if b[0] + b[1] != self.m_e or b[2] + b[3] != self.m_r:
                raise InputError(
                    f"item {item_id!r}: expected {self.m_e} expert and {self.m_r} regular responses"
                )

    @classmethod
    def from_raw(cls, rows: Sequence, truth: Optional[dict] = None) -> "TwoClassDataset":
        """Rows are ``(item_id, worker_id, answer in {0, 1}, class)``."""
        tally = defaultdict(lambda: [0, 0, 0, 0])
        for item_id, _, answer, klass in rows:
            if answer not in (0, 1):
                raise InputError(f"item {item_id!r}: binary answer expected, got {answer}")
            if klass not in (EXPERT, REGULAR):
                raise InputError(f"item {item_id!r}: unknown worker class {klass!r}")
            offset = 0 if klass == EXPERT else 2
            tally[item_id][offset + (0 if answer == 1 else 1)] += 1
        items = [(i, tuple(v)) for i, v in tally.items()]
        m_e = items[0][1][0] + items[0][1][1] if items else 0
        m_r = items[0][1][2] + items[0][1][3] if items else 0
        return cls(items, m_e, m_r, truth)

    def class_dataset(self, klass: str) -> Dataset:
        s = slice(0, 2) if klass == EXPERT else slice(2, 4)
        return Dataset(2, [(i, b[s]) for i, b in self.items], self.truth)


def two_class_geq(expert_prior: bool):
    """Dominance test between two-class buckets (reflexive)."""

    def rule1(a, b):
        return a[0] >= b[0] and a[2] >= b[2] and a[1] <= b[1] and a[3] <= b[3]

    def rule2(a, b):
        return (a[0] + a[2] == b[0] + b[2] and a[1] + a[3] == b[1] + b[3]
                and a[0] >= b[0] and a[1] <= b[1])

    def geq(a, b):
        return rule1(a, b) or (expert_prior and rule2(a, b))

    return geq


def _closure_geq(nodes: Sequence, base) -> dict:
    """Transitive closure of a reflexive relation as ``{a: set of b with a >= b}``."""
    below = {a: {b for b in nodes if base(a, b)} for a in nodes}
    changed = True
    while changed:
        changed = False
        for a in nodes:
            grown = set().union(*(below[b] for b in below[a]))
            if len(grown) > len(below[a]):
                below[a] = grown
                changed = True
    return below


def build_two_class_poset(m_e: int, m_r: int, expert_prior: bool = False,
                          node_cap: int = DEFAULT_NODE_CAP) -> BucketPoset:
    """Buckets with at most m_e expert and m_r regular responses.

    Rule 1 (more yes and fewer no in both classes) always applies; rule 2
    (same totals, more expert yes / fewer expert no) only with ``expert_prior``.
    """
    if m_e < 0 or m_r < 0 or m_e + m_r == 0:
        raise InputError("need m_e, m_r >= 0, not both zero")
    size = (m_e + 1) * (m_e + 2) // 2 * (m_r + 1) * (m_r + 2) // 2
    if size > node_cap:
        raise CapExceeded(f"{size} two-class buckets exceed node cap {node_cap}")
    nodes = [(ye, ne, yr, nr)
             for ye in range(m_e + 1) for ne in range(m_e + 1 - ye)
             for yr in range(m_r + 1) for nr in range(m_r + 1 - yr)]
    return _two_class_order(nodes, expert_prior)


def _two_class_order(nodes: Sequence, expert_prior: bool) -> BucketPoset:
    # rank keys give a linear extension, so nodes sorted descending are topological
    nodes = sorted(nodes, key=lambda b: (b[0] + b[2] - b[1] - b[3], b[0] - b[1]), reverse=True)
    below = _closure_geq(nodes, two_class_geq(expert_prior))
    return BucketPoset.from_order(nodes, lambda a, b: b in below[a])


@dataclass(frozen=True)
class TwoClassSolution:
    mapping: Mapping
    expert: ConfusionMatrix
    regular: ConfusionMatrix
    loglik: float
    candidates_evaluated: int
    reasonable: bool = True  # False when no monotone labelling keeps both classes better than random


def _two_class_score(T: np.ndarray, labels: np.ndarray, R: int) -> np.ndarray:
    return profile_logliks(T[:, :2], labels, R) + profile_logliks(T[:, 2:], labels, R)


def _two_class_admissible(T: np.ndarray, labels: np.ndarray, R: int) -> np.ndarray:
    return dominant_mask(T[:, :2], labels, R) & dominant_mask(T[:, 2:], labels, R)


def two_class_opt(dataset: TwoClassDataset, expert_prior: bool = False,
                  cap: Optional[int] = None) -> TwoClassSolution:
    """Best monotone labelling with separate closed-form error rates per class.

    Candidates must keep both classes better than random; when none does,
    the unrestricted optimum is returned with ``reasonable=False``.
    """
    groups = defaultdict(list)
    for item_id, b in dataset.items:
        groups[tuple(b)].append(item_id)
    if not groups:
        empty = FilterParams(0.0, 0.0, False, False).matrix()
        return TwoClassSolution(Mapping({}), empty, empty, 0.0, 1, True)
    full = build_two_class_poset(max(dataset.m_e, 0), max(dataset.m_r, 0), expert_prior) \
        if dataset.m_e + dataset.m_r > 0 else None
    keys = list(groups)
    if full is not None:
        poset = full.induced(keys)
    else:
        poset = _two_class_order(keys, expert_prior)
    keys = list(poset.nodes)
    # tallies in (no, yes) order per class so rating 1 = "0", rating 2 = "1"
    T = np.array([[b[1], b[0], b[3], b[2]] for b in keys], dtype=float)
    T *= np.array([len(groups[b]) for b in keys], dtype=float)[:, None]
    labels, loglik, count, reasonable = best_monotone(
        poset, keys, T, 2, cap, score=_two_class_score, admissible=_two_class_admissible)
    mapping = Mapping({k: int(v) for k, v in zip(keys, labels)})
    matrices = []
    for s in (slice(0, 2), slice(2, 4)):
        buckets = [(k[s], groups[k]) for k in keys]
        matrices.append(_class_params(buckets, [mapping[k] for k in keys]))
    return TwoClassSolution(mapping, matrices[0], matrices[1], loglik, count, reasonable)


def _class_params(buckets: Sequence, labels: Sequence) -> ConfusionMatrix:
    # several two-class buckets can share one per-class count, so sum by label
    ones = {1: 0, 2: 0}
    total = {1: 0, 2: 0}
    for (counts, ids), label in zip(buckets, labels):
        ones[label] += counts[0] * len(ids)
        total[label] += sum(counts) * len(ids)
    e0 = ones[1] / total[1] if total[1] else 0.0
    e1 = (total[2] - ones[2]) / total[2] if total[2] else 0.0
    return FilterParams(e0, e1, total[1] > 0, total[2] > 0).matrix()
