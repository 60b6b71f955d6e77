import math

import numpy as np
import pytest

from crowdmle.core import Dataset, Mapping, bucketize
from crowdmle.errors import CapExceeded, InputError
from crowdmle.oracle import (
    all_item_labellings,
    brute_force_filter,
    brute_force_rating,
    grid_argmax,
    grid_verify_params,
)
from crowdmle.poset import compositions

from .strategies import random_binary, random_rating


def test_search_space_sizes(four_items):
    assert brute_force_filter(four_items, "all").search_space_size == 16
    data = Dataset(3, [(f"i{k}", (1, 1, 0)) for k in range(6)])
    assert brute_force_rating(data, 3, "all").search_space_size == 729


def test_bucketized_search_space_is_R_to_the_buckets():
    data = Dataset(3, [(f"i{k}", c) for k, c in enumerate(compositions(2, 3) * 2)])
    rep = brute_force_rating(data, 3, "bucketized")
    assert rep.search_space_size == 3 ** 6


def test_restrictions_are_nested():
    rng = np.random.default_rng(4)
    for _ in range(20):
        data = random_rating(rng, 6, 3, 2)
        a = brute_force_rating(data, 3, "all").best_loglik
        b = brute_force_rating(data, 3, "diagonally-dominant").best_loglik
        c = brute_force_rating(data, 3, "bucketized").best_loglik
        assert a >= b - 1e-12 and a >= c - 1e-12


def test_vectorised_search_agrees_with_plain_loop():
    rng = np.random.default_rng(2)
    data = random_binary(rng, 6, 3)
    C = data.count_array()
    best = -math.inf
    for labels in all_item_labellings(data.n, 2):
        total = 0.0
        for j in (1, 2):
            S = sum((C[i] for i in range(data.n) if labels[i] == j), np.zeros(2))
            N = S.sum()
            total += sum(s * math.log(s / N) for s in S if s > 0)
        best = max(best, total)
    assert brute_force_filter(data, "all").best_loglik == pytest.approx(best, abs=1e-12)


def test_four_items_grid():
    data = Dataset(2, [("I1", (3, 0)), ("I2", (1, 2)), ("I3", (2, 1)), ("I4", (2, 1))])
    buckets = bucketize(data)
    f = Mapping({(3, 0): 2, (2, 1): 2, (1, 2): 1})
    grid_max, closed = grid_verify_params(buckets, f, 0.01)
    assert closed >= grid_max - 1e-12
    e0, e1 = grid_argmax(buckets, f, 0.01)
    assert abs(e0 - 1 / 3) <= 0.01 and abs(e1 - 2 / 9) <= 0.01


def test_unanimous_grid():
    buckets = bucketize(Dataset(2, [("a", (3, 0))]))
    grid_max, closed = grid_verify_params(buckets, Mapping({(3, 0): 2}), 0.1)
    assert closed == 0.0 and grid_max <= 0.0


def test_errors():
    data = Dataset(2, [(f"i{k}", (1, 0)) for k in range(30)])
    with pytest.raises(CapExceeded):
        brute_force_filter(data, "all", cap=1000)
    with pytest.raises(InputError):
        brute_force_filter(Dataset(2, [("a", (1, 0))]), "bogus")
    with pytest.raises(InputError):
        grid_verify_params([], Mapping({}), 0.5)
