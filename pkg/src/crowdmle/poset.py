"""Finite posets over response-set buckets and monotone-map enumeration."""

from __future__ import annotations

import heapq
import os
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .core import Mapping
from .errors import CapExceeded, InputError

DEFAULT_ENUM_CAP = 10**7
DEFAULT_NODE_CAP = 10**5


def enumeration_cap(cap: Optional[int] = None) -> int:
    if cap is not None:
        return int(cap)
    env = os.environ.get("CROWD_MLE_CAP")
    return int(env) if env else DEFAULT_ENUM_CAP


@dataclass
class BucketPoset:
    """DAG of buckets; an edge ``(a, b)`` means ``a`` covers (dominates) ``b``.

    ``nodes`` is stored in topological order: every node precedes the nodes
    it dominates.
    """

    nodes: list
    cover_edges: list
    _index: dict = field(init=False, repr=False)
    _parents: list = field(init=False, repr=False)
    _children: list = field(init=False, repr=False)
    _desc: list = field(init=False, repr=False)

    def __post_init__(self):
        nodes = [tuple(v) for v in self.nodes]
        if len(set(nodes)) != len(nodes):
            raise InputError("poset nodes must be distinct")
        index = {v: i for i, v in enumerate(nodes)}
        parents = [[] for _ in nodes]
        children = [[] for _ in nodes]
        for a, b in self.cover_edges:
            ia, ib = index[tuple(a)], index[tuple(b)]
            parents[ib].append(ia)
            children[ia].append(ib)
        order = _topological(len(nodes), children, parents)
        # re-index so that list order is topological
        remap = {old: new for new, old in enumerate(order)}
        self.nodes = [nodes[i] for i in order]
        self._index = {v: i for i, v in enumerate(self.nodes)}
        self._parents = [sorted(remap[p] for p in parents[old]) for old in order]
        self._children = [sorted(remap[c] for c in children[old]) for old in order]
        self.cover_edges = sorted(
            {(tuple(a), tuple(b)) for a, b in self.cover_edges},
            key=lambda e: (self._index[e[0]], self._index[e[1]]),
        )
        desc = [0] * len(self.nodes)
        for i in reversed(range(len(self.nodes))):
            bits = 1 << i
            for c in self._children[i]:
                bits |= desc[c]
            desc[i] = bits
        self._desc = desc

    def __len__(self):
        return len(self.nodes)

    @property
    def topo_order(self) -> list:
        return list(self.nodes)

    def index_of(self, node) -> int:
        return self._index[tuple(node)]

    def parents(self, i: int) -> list:
        return self._parents[i]

    def leq(self, b, a) -> bool:
        """True iff ``a`` dominates ``b`` transitively (reflexive)."""
        return bool(self._desc[self._index[tuple(a)]] >> self._index[tuple(b)] & 1)

    def descendants_mask(self, i: int) -> int:
        return self._desc[i]

    @classmethod
    def from_order(cls, nodes: Sequence, geq: Callable) -> "BucketPoset":
        """Build the cover graph of the partial order ``geq`` restricted to ``nodes``."""
        nodes = [tuple(v) for v in nodes]
        N = len(nodes)
        above = [0] * N  # strict down-sets as bitmasks
        for i in range(N):
            for j in range(N):
                if i != j and geq(nodes[i], nodes[j]):
                    above[i] |= 1 << j
        edges = []
        for i in range(N):
            below = above[i]
            # j is covered by i iff no k strictly between
            between = 0
            k_bits = below
            while k_bits:
                k = (k_bits & -k_bits).bit_length() - 1
                between |= above[k]
                k_bits &= k_bits - 1
            cover = below & ~between
            while cover:
                j = (cover & -cover).bit_length() - 1
                edges.append((nodes[i], nodes[j]))
                cover &= cover - 1
        return cls(nodes, edges)

    def induced(self, subset: Sequence) -> "BucketPoset":
        """Sub-poset on ``subset`` with order inherited through the full closure."""
        subset = sorted({tuple(v) for v in subset}, key=self.index_of)
        return BucketPoset.from_order(subset, lambda a, b: self.leq(b, a))


def _topological(N: int, children: list, parents: list) -> list:
    indeg = [len(p) for p in parents]
    heap = [i for i in range(N) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        i = heapq.heappop(heap)
        order.append(i)
        for c in children[i]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    if len(order) != N:
        raise InputError("cover edges contain a cycle")
    return order


def compositions(m: int, R: int) -> list:
    """All (v_R, ..., v_1) with non-negative entries summing to m, lexicographically descending."""
    if R == 1:
        return [(m,)]
    out = []
    for first in range(m, -1, -1):
        out.extend((first,) + rest for rest in compositions(m - first, R - 1))
    return out


def build_rating_poset(R: int, m: int, node_cap: int = DEFAULT_NODE_CAP) -> BucketPoset:
    """Dominance DAG on all response sets of m ratings in 1..R.

    ``B1`` covers ``B2`` when ``B1`` is ``B2`` with one response moved from
    rating r-1 to r.
    """
    if R < 2 or m < 1:
        raise InputError(f"need R >= 2 and m >= 1, got R={R}, m={m}")
    size = comb(R + m - 1, R - 1)
    if size > node_cap:
        raise CapExceeded(f"{size} response sets for R={R}, m={m} exceeds node cap {node_cap}")
    nodes = compositions(m, R)
    node_set = set(nodes)
    edges = []
    for b in nodes:
        # tuple position k holds rating R-k; moving a vote up goes from k+1 to k
        for k in range(R - 1):
            if b[k + 1] > 0:
                a = list(b)
                a[k] += 1
                a[k + 1] -= 1
                a = tuple(a)
                assert a in node_set
                edges.append((a, b))
    return BucketPoset(nodes, edges)


def cumulative(counts: Sequence[int]) -> tuple:
    """``cum[r-1]`` = number of responses with rating >= r, for r = 1..R."""
    running, out = 0, []
    for v in counts:  # v_R first
        running += v
        out.append(running)
    return tuple(reversed(out))


def from_cumulative(cum: Sequence[int]) -> tuple:
    R = len(cum)
    low_to_high = [cum[r] - (cum[r + 1] if r + 1 < R else 0) for r in range(R)]
    return tuple(reversed(low_to_high))


def _check_pair(a, b):
    if len(a) != len(b):
        raise InputError(f"response sets {a} and {b} have different R")
    if sum(a) != sum(b):
        raise InputError(f"response sets {a} and {b} have different totals")


def dominates(a: Sequence[int], b: Sequence[int]) -> bool:
    """Transitive dominance via upper-tail cumulative counts (reflexive)."""
    _check_pair(a, b)
    return all(x >= y for x, y in zip(cumulative(a), cumulative(b)))


def meet(a: Sequence[int], b: Sequence[int]) -> tuple:
    """Greatest lower bound: pointwise minimum of upper-tail cumulative counts."""
    _check_pair(a, b)
    return from_cumulative([min(x, y) for x, y in zip(cumulative(a), cumulative(b))])


def join(a: Sequence[int], b: Sequence[int]) -> tuple:
    _check_pair(a, b)
    return from_cumulative([max(x, y) for x, y in zip(cumulative(a), cumulative(b))])


def transitive_closure(poset: BucketPoset) -> set:
    """Reflexive-transitive closure of the cover edges as ``(dominating, dominated)`` pairs."""
    pairs = set()
    for i, a in enumerate(poset.nodes):
        bits = poset.descendants_mask(i)
        while bits:
            j = (bits & -bits).bit_length() - 1
            pairs.add((a, poset.nodes[j]))
            bits &= bits - 1
    return pairs


def count_monotone_maps(poset: BucketPoset, R: int) -> int:
    """Number of maps g: nodes -> 1..R with g(a) >= g(b) whenever a dominates b.

    Dynamic programme over the topological order; the state is the values of
    already-assigned nodes that still have unassigned children.
    """
    N = len(poset)
    if N == 0:
        return 1
    last_child = [max(poset._children[i], default=-1) for i in range(N)]
    states = {(): 1}
    active: list = []
    for k in range(N):
        parent_pos = [active.index(p) for p in poset.parents(k)]
        keep_old = [pos for pos, i in enumerate(active) if last_child[i] > k]
        keep_new = last_child[k] > k
        new_states: dict = {}
        for state, count in states.items():
            ub = min((state[pos] for pos in parent_pos), default=R)
            base = tuple(state[pos] for pos in keep_old)
            if keep_new:
                for v in range(1, ub + 1):
                    key = base + (v,)
                    new_states[key] = new_states.get(key, 0) + count
            else:
                new_states[base] = new_states.get(base, 0) + count * ub
        states = new_states
        active = [active[pos] for pos in keep_old] + ([k] if keep_new else [])
    return sum(states.values())


def _guard(poset: BucketPoset, R: int, cap: Optional[int]) -> int:
    cap = enumeration_cap(cap)
    total = count_monotone_maps(poset, R)
    if total > cap:
        raise CapExceeded(
            f"{total} dominance-consistent mappings exceed the cap of {cap}; "
            "use count-only mode or smaller R, m"
        )
    return total


def enumerate_monotone_maps(
    poset: BucketPoset, R: int, cap: Optional[int] = None
) -> Iterator[Mapping]:
    """Yield every monotone map nodes -> 1..R, lexicographically in topological order."""
    if R < 2:
        raise InputError("R must be >= 2")
    _guard(poset, R, cap)
    N = len(poset)
    values = [0] * N

    def extend(k):
        if k == N:
            yield Mapping(dict(zip(poset.nodes, values)))
            return
        ub = min((values[p] for p in poset.parents(k)), default=R)
        for v in range(1, ub + 1):
            values[k] = v
            yield from extend(k + 1)

    yield from extend(0)


def monotone_label_array(poset: BucketPoset, R: int, cap: Optional[int] = None) -> np.ndarray:
    """All monotone maps as a K x N int8 array, same row order as the stream.

    Breadth-wise expansion: each partial map is extended by every value from
    1 up to the minimum of its parents' values.
    """
    _guard(poset, R, cap)
    rows = np.zeros((1, 0), dtype=np.int8)
    for k in range(len(poset)):
        parents = poset.parents(k)
        if parents:
            ub = rows[:, parents].min(axis=1).astype(np.int64)
        else:
            ub = np.full(rows.shape[0], R, dtype=np.int64)
        starts = np.cumsum(ub) - ub
        vals = np.arange(int(ub.sum())) - np.repeat(starts, ub) + 1
        rows = np.repeat(rows, ub, axis=0)
        rows = np.concatenate([rows, vals.astype(np.int8)[:, None]], axis=1)
    return rows
