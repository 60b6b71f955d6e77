"""How often exhaustive search beats the structured estimators on tiny inputs.

Counts, per estimator, the random instances where some labelling outside its
search space has strictly higher likelihood under the same better-than-random
restriction.
"""

import argparse

import numpy as np

from crowdmle.core import Dataset
from crowdmle.extensions import TwoClassDataset, two_class_opt, variable_opt
from crowdmle.filtering import filter_opt
from crowdmle.oracle import brute_force_filter, brute_force_rating, brute_force_two_class
from crowdmle.poset import compositions
from crowdmle.rating import rating_opt

EPS = 1e-9


def binary(rng):
    m = int(rng.integers(1, 4))
    ones = rng.integers(0, m + 1, size=int(rng.integers(1, 13)))
    return Dataset(2, [(f"i{k}", (int(a), m - int(a))) for k, a in enumerate(ones)])


def rating(rng):
    comps = compositions(2, 3)
    picks = rng.integers(0, len(comps), size=int(rng.integers(1, 7)))
    return Dataset(3, [(f"i{k}", comps[p]) for k, p in enumerate(picks)])


def two_class(rng):
    m_e, m_r = int(rng.integers(1, 3)), int(rng.integers(1, 3))
    items = []
    for k in range(int(rng.integers(1, 8))):
        ye, yr = int(rng.integers(0, m_e + 1)), int(rng.integers(0, m_r + 1))
        items.append((f"i{k}", (ye, m_e - ye, yr, m_r - yr)))
    return TwoClassDataset(items, m_e, m_r)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    tally = {k: [0, 0] for k in ("filter/items", "filter/buckets", "variable/items",
                                 "rating/items", "rating/buckets", "two-class/buckets")}
    for _ in range(args.instances):
        data = binary(rng)
        opt = filter_opt(data).loglik
        tally["filter/items"][0] += brute_force_filter(data).best_loglik > opt + EPS
        tally["filter/buckets"][0] += brute_force_filter(data, within_buckets=True).best_loglik > opt + EPS
        var = Dataset(2, data.items, fixed_m=False)
        tally["variable/items"][0] += brute_force_filter(var).best_loglik > variable_opt(var).loglik + EPS

        data = rating(rng)
        opt = rating_opt(data).loglik
        tally["rating/items"][0] += brute_force_rating(data, 3, "diagonally-dominant").best_loglik > opt + EPS
        tally["rating/buckets"][0] += brute_force_rating(
            data, 3, "diagonally-dominant", within_buckets=True).best_loglik > opt + EPS

        data = two_class(rng)
        sol = two_class_opt(data)
        oracle = brute_force_two_class(data.items, "reasonable", within_buckets=True)
        if oracle.best_mapping is not None:
            tally["two-class/buckets"][0] += oracle.best_loglik > sol.loglik + EPS
        for v in tally.values():
            v[1] += 1
    for name, (beaten, total) in tally.items():
        print(f"{name:<18} beaten on {beaten:>4} / {total}")


if __name__ == "__main__":
    main()
