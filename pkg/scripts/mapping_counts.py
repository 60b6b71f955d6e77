"""Size of each search space for n = 100 items: unconstrained, bucketized and
dominance-consistent labellings (exact counts for the last column)."""

import math
from math import comb

from crowdmle.rating import count_dominance_consistent

N_ITEMS = 100
CASES = [(3, 3), (3, 4), (3, 5), (4, 3), (4, 4), (5, 2), (5, 3)]


def main():
    print(f"{'R':>2} {'m':>2} {'unconstrained':>14} {'bucketized':>11} {'monotone':>12}")
    for R, m in CASES:
        buckets = comb(R + m - 1, R - 1)
        unconstrained = N_ITEMS * math.log10(R)
        bucketized = buckets * math.log10(R)
        count = count_dominance_consistent(R, m)
        print(f"{R:>2} {m:>2} {'1e%d' % math.floor(unconstrained):>14} {'1e%d' % math.floor(bucketized):>11} {count:>12}")


if __name__ == "__main__":
    main()
