"""Benchmark sweeps behind the filtering and rating comparison plots.

Writes one plot-ready CSV per sweep into --out (default ``results/``):

    python3 scripts/reproduce_figures.py --trials 100 --n 1000
"""

import argparse
from pathlib import Path

from crowdmle import io
from crowdmle.cli import BENCH_HEADER, RunConfig, benchmark_rows

SWEEPS = {
    "filter_s0.5": dict(mode="filter", R=2, selectivity=(0.5,), m=[1, 3, 5, 7, 9]),
    "filter_s0.7": dict(mode="filter", R=2, selectivity=(0.7,), m=[1, 3, 5, 7, 9]),
    "rating_R3": dict(mode="rating", R=3, selectivity=None, m=[1, 2, 3, 4, 5]),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    ap.add_argument("--only", choices=sorted(SWEEPS), nargs="*")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.only or SWEEPS:
        cfg = RunConfig(command="benchmark", n=args.n, trials=args.trials, seed=args.seed, **SWEEPS[name])
        rows, capped = benchmark_rows(cfg)
        io.write_csv(out / f"{name}.csv", BENCH_HEADER, rows)
        print(f"{name}: {len(rows)} rows{' (some trials hit the cap)' if capped else ''}")
        for row in rows:
            if row[1] in ("opt", "em-star"):
                print(f"  m={row[0]} {row[1]:<8} loglik={float(row[2]):10.2f} wrong={float(row[3]):.3f}")


if __name__ == "__main__":
    main()
