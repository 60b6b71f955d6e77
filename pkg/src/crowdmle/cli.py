"""``crowd-mle``: estimate, simulate, benchmark, enumerate, sample.

Exit codes: 0 ok, 2 bad input, 3 enumeration cap exceeded, 4 bad configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .core import ConfusionMatrix, Dataset, bucketize, majority_vote
from .em import MAX_ITER, TOL, em_run, em_star, filter_presets, rating_presets
from .errors import CapExceeded, ConfigError, CrowdMLEError, InputError
from .extensions import (
    build_two_class_poset,
    build_variable_poset,
    count_variable_boundaries,
    two_class_opt,
    variable_opt,
)
from .filtering import filter_opt
from .metrics import evaluate
from .oracle import brute_force_filter, brute_force_rating
from .poset import build_rating_poset, count_monotone_maps, enumerate_monotone_maps, enumeration_cap
from .rating import rating_likelihood, rating_opt, rating_params
from .synth import (
    SynthConfig,
    gen_matrix,
    gen_truth,
    generate,
    simulate_two_class,
    simulate_variable,
    subsample_responses,
)

MODES = ("filter", "rating", "variable", "two-class")
ALGORITHMS = ("opt", "em1", "em2", "em3", "em-star", "majority", "oracle")
BENCH_ALGORITHMS = ("opt", "em1", "em2", "em3", "em-star", "majority")


@dataclass
class RunConfig:
    command: str
    mode: str = "filter"
    algorithm: str = "opt"
    R: Optional[int] = None
    m: list = field(default_factory=lambda: [3])
    n: int = 1000
    selectivity: Optional[tuple] = None
    trials: int = 100
    seed: int = 0
    input: Optional[str] = None
    truth: Optional[str] = None
    output: Optional[str] = None
    max_iter: int = MAX_ITER
    tol: float = TOL
    cap: Optional[int] = None
    expert_prior: bool = False
    matrix_mode: Optional[str] = None
    listing: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.R is None:
            self.R = 2 if self.mode != "rating" else 3
        if self.mode != "rating" and self.R != 2:
            raise ConfigError(f"mode {self.mode} is binary; R must be 2")
        if self.R < 2:
            raise ConfigError("R must be >= 2")
        if self.n < 0 or self.trials < 1 or self.max_iter < 1 or self.tol <= 0:
            raise ConfigError("need n >= 0, trials >= 1, max-iter >= 1, tol > 0")
        if any(m < 0 for m in self.m):
            raise ConfigError("m must be non-negative")
        if self.cap is not None and self.cap < 1:
            raise ConfigError("cap must be positive")
        if self.matrix_mode is None:
            self.matrix_mode = "better-than-random" if self.R == 2 else "diagonally-dominant"

    @property
    def binary(self) -> bool:
        return self.mode != "rating"

    def synth(self, m: int, seed: int) -> SynthConfig:
        sel = self.selectivity
        if sel is None:
            sel = (1.0 / self.R,) * self.R
        elif len(sel) == 1:
            if self.R != 2:
                raise ConfigError("a scalar selectivity needs R=2")
            sel = sel[0]
        return SynthConfig(self.n, self.R, m, sel, self.matrix_mode, seed)


# -- estimate ---------------------------------------------------------------

def _load(cfg: RunConfig):
    if not cfg.input:
        raise ConfigError("--input is required")
    truth = io.read_truth(cfg.truth, cfg.binary) if cfg.truth else None
    if cfg.mode == "two-class":
        return io.read_two_class(cfg.input, truth)
    fixed = cfg.mode != "variable"
    if io.is_raw(cfg.input):
        return io.read_raw(cfg.input, cfg.R, truth, fixed, binary=cfg.binary)
    data = io.read_counts(cfg.input, fixed, truth)
    if data.R != cfg.R:
        raise InputError(f"{cfg.input}: file has R={data.R} but R={cfg.R} was requested")
    return data


def _labels_out(mapping: dict, binary: bool) -> dict:
    shift = 1 if binary else 0
    return {k: int(v) - shift for k, v in sorted(mapping.items())}


def _em_inits(cfg: RunConfig, R: int):
    presets = filter_presets() if R == 2 else rating_presets(R)
    return {"em1": presets[:1], "em2": presets[1:2], "em3": presets[2:3], "em-star": presets}[cfg.algorithm]


def solve(cfg: RunConfig, data) -> dict:
    """Run the configured algorithm; returns item labels, matrix and diagnostics."""
    if cfg.mode == "two-class":
        if cfg.algorithm != "opt":
            raise ConfigError("two-class mode supports algorithm opt only")
        sol = two_class_opt(data, cfg.expert_prior, cfg.cap)
        labels = {i: sol.mapping[b] for i, b in data.items}
        return {
            "labels": labels,
            "matrices": {"expert": sol.expert, "regular": sol.regular},
            "loglik": sol.loglik,
            "candidates_evaluated": sol.candidates_evaluated,
            "extra": {"reasonable": sol.reasonable},
        }
    if cfg.algorithm == "opt":
        if cfg.mode == "filter":
            sol = filter_opt(data)
            matrix = sol.params.matrix()
        elif cfg.mode == "variable":
            sol = variable_opt(data, cap=cfg.cap)
            matrix = sol.params.matrix()
        else:
            sol = rating_opt(data, cfg.cap)
            matrix = sol.matrix
        return {"labels": sol.mapping.item_labels(data), "matrix": matrix, "loglik": sol.loglik,
                "candidates_evaluated": sol.candidates_evaluated, "extra": {}}
    if cfg.algorithm == "majority":
        mapping = majority_vote(data)
        buckets = bucketize(data, fixed_m=False)
        matrix = rating_params(buckets, mapping, data.R)
        return {"labels": mapping.item_labels(data), "matrix": matrix,
                "loglik": rating_likelihood(buckets, mapping, data.R),
                "candidates_evaluated": 1, "extra": {}}
    if cfg.algorithm == "oracle":
        if data.R == 2:
            rep = brute_force_filter(data, "reasonable")
        else:
            rep = brute_force_rating(data, data.R, "diagonally-dominant")
        labels = rep.best_mapping
        matrix = _item_params(data, labels)
        return {"labels": labels, "matrix": matrix, "loglik": rep.best_loglik,
                "candidates_evaluated": rep.search_space_size, "extra": {"restricted": rep.restricted}}
    inits = _em_inits(cfg, data.R)
    res = em_star(data, inits, cfg.max_iter, cfg.tol) if len(inits) > 1 else \
        em_run(data, inits[0], cfg.max_iter, cfg.tol)
    return {"labels": res.mapping.item_labels(data), "matrix": res.matrix, "loglik": res.loglik,
            "candidates_evaluated": len(inits),
            "extra": {"iterations": res.iterations, "converged": res.converged, "init": res.init}}


def _item_params(data: Dataset, labels: dict) -> ConfusionMatrix:
    # item-level labels may split buckets, so tally per item
    R = data.R
    S = np.zeros((R, R))
    for item_id, counts in data.items:
        S[:, labels[item_id] - 1] += np.asarray(counts[::-1], dtype=float)
    totals = S.sum(axis=0)
    p = np.where(totals > 0, S / np.where(totals > 0, totals, 1), 1.0 / R)
    return ConfusionMatrix(p, tuple(bool(t == 0) for t in totals))


def cmd_estimate(cfg: RunConfig) -> int:
    data = _load(cfg)
    if not data.items:
        raise InputError(f"{cfg.input}: no items")
    result = solve(cfg, data)
    out = {
        "algorithm": cfg.algorithm,
        "mode": cfg.mode,
        "mapping": _labels_out(result["labels"], cfg.binary),
        "log_likelihood": io.encode_float(result["loglik"]),
        "candidates_evaluated": result["candidates_evaluated"],
        "config": _config_echo(cfg),
        **result["extra"],
    }
    if "matrices" in result:
        out["matrices"] = {k: _matrix_out(v, True) for k, v in result["matrices"].items()}
    else:
        out["matrix"] = _matrix_out(result["matrix"], cfg.binary)
    if data.truth is not None and "matrix" in result:
        report = evaluate(result["labels"], data.truth, result["matrix"], result["matrix"])
        out["fraction_incorrect"] = report.fraction_incorrect
        out["distance_weighted"] = report.distance_weighted
    _emit(io.dump_json(out), cfg.output)
    return 0


def _matrix_out(p: ConfusionMatrix, binary: bool) -> dict:
    obj = io.matrix_json(p)
    if binary:
        obj["error_rates"] = {"e0": float(p.e0), "e1": float(p.e1)}
    return obj


def _config_echo(cfg: RunConfig) -> dict:
    echo = asdict(cfg)
    echo.pop("output", None)
    return echo


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- simulate / sample --------------------------------------------------------

def cmd_simulate(cfg: RunConfig) -> int:
    if not cfg.output:
        raise ConfigError("--output directory is required")
    m = cfg.m[0]
    outdir = Path(cfg.output)
    outdir.mkdir(parents=True, exist_ok=True)
    if cfg.mode == "two-class":
        if len(cfg.m) != 2:
            raise ConfigError("two-class simulation needs --m m_e,m_r")
        base = cfg.synth(1, cfg.seed)
        truth = gen_truth(base)
        expert = gen_matrix(SynthConfig(1, 2, 1, base.selectivity, "better-than-random", cfg.seed))
        regular = gen_matrix(SynthConfig(1, 2, 1, base.selectivity, "better-than-random", cfg.seed + 1))
        data = simulate_two_class(truth, expert, regular, cfg.m[0], cfg.m[1], cfg.seed)
        rows = []
        for item_id, (ye, ne, yr, nr) in data.items:
            k = 0
            for klass, ans, count in (("expert", 1, ye), ("expert", 0, ne),
                                      ("regular", 1, yr), ("regular", 0, nr)):
                for _ in range(count):
                    rows.append([item_id, f"{klass[0]}{k}", ans, klass])
                    k += 1
        io.write_csv(outdir / "responses.csv", ["item_id", "worker_id", "rating", "class"], rows)
        io.write_truth(outdir / "truth.csv", truth, True)
        io.dump_json({"expert": io.matrix_json(expert), "regular": io.matrix_json(regular),
                      "config": _config_echo(cfg)}, outdir / "matrix.json")
        return 0
    if m == 0 and cfg.mode != "variable":
        raise ConfigError("m = 0 is only allowed in variable mode")
    scfg = cfg.synth(max(m, 1), cfg.seed)
    if cfg.mode == "variable":
        truth, matrix = gen_truth(scfg), gen_matrix(scfg)
        data = simulate_variable(truth, matrix, m, cfg.seed)
    else:
        data, matrix = generate(scfg)
    io.write_counts(outdir / "responses.csv", data, cfg.binary)
    io.write_truth(outdir / "truth.csv", data.truth, cfg.binary)
    io.dump_json({"matrix": io.matrix_json(matrix), "config": _config_echo(cfg)},
                 outdir / "matrix.json")
    return 0


def cmd_sample(cfg: RunConfig) -> int:
    if not cfg.input or not cfg.output:
        raise ConfigError("--input and --output are required")
    if not io.is_raw(cfg.input):
        raise InputError(f"{cfg.input}: sampling needs raw item_id,worker_id,rating rows")
    data = io.read_raw(cfg.input, cfg.R, None, fixed_m=False, binary=cfg.binary)
    io.write_raw(cfg.output, subsample_responses(data, cfg.m[0], cfg.seed), cfg.binary)
    return 0


# -- enumerate ----------------------------------------------------------------

def cmd_enumerate(cfg: RunConfig) -> int:
    m = cfg.m[0]
    if m < 1:
        raise ConfigError("m must be >= 1")
    if cfg.mode == "variable":
        formula, count = count_variable_boundaries(m)
        out = {"mode": "variable", "m_max": m, "count": count, "boundary_formula": formula}
        poset = build_variable_poset(m)
    elif cfg.mode == "two-class":
        m_e, m_r = (cfg.m + [cfg.m[0]])[:2]
        poset = build_two_class_poset(m_e, m_r, cfg.expert_prior)
        out = {"mode": "two-class", "m_e": m_e, "m_r": m_r, "count": count_monotone_maps(poset, 2)}
    else:
        R = 2 if cfg.mode == "filter" else cfg.R
        poset = build_rating_poset(R, m)
        out = {"mode": cfg.mode, "R": R, "m": m, "count": count_monotone_maps(poset, R)}
    if cfg.listing:
        if not cfg.output:
            raise ConfigError("--list needs --output")
        R = cfg.R if cfg.mode == "rating" else 2
        with open(cfg.output, "w", newline="\n", encoding="utf-8") as fh:
            for f in enumerate_monotone_maps(poset, R, cfg.cap):
                fh.write(json.dumps([[list(k), v] for k, v in f.assignment.items()]) + "\n")
        sys.stdout.write(io.dump_json(out))
    else:
        _emit(io.dump_json(out), cfg.output)
    return 0


# -- benchmark ----------------------------------------------------------------

BENCH_HEADER = ["m", "algorithm", "mean_log_likelihood", "mean_fraction_incorrect",
                "mean_distance_weighted", "mean_emd", "mean_jsd", "trials", "seed_base",
                "failed_trials", "mode", "matrix_mode"]


def trial_seed(base: int, m: int, trial: int) -> int:
    return int(np.random.SeedSequence([base, m, trial]).generate_state(1, np.uint64)[0])


def run_trial(cfg: RunConfig, m: int, trial: int, algorithms=BENCH_ALGORITHMS) -> dict:
    """Metrics per algorithm for one generated instance (None when the cap was hit)."""
    data, p_true = generate(cfg.synth(m, trial_seed(cfg.seed, m, trial)))
    out = {}
    for alg in algorithms:
        sub = RunConfig(**{**asdict(cfg), "algorithm": alg, "command": "estimate"})
        try:
            res = solve(sub, data)
        except CapExceeded:
            out[alg] = None
            continue
        rep = evaluate(res["labels"], data.truth, res["matrix"], p_true)
        out[alg] = (res["loglik"], rep.fraction_incorrect, rep.distance_weighted,
                    rep.emd_score, rep.jsd_score)
    return out


def benchmark_rows(cfg: RunConfig, algorithms=BENCH_ALGORITHMS) -> tuple:
    if cfg.mode not in ("filter", "rating"):
        raise ConfigError("benchmark supports filter and rating modes")
    rows, capped = [], False
    for m in sorted(cfg.m):
        if m < 1:
            raise ConfigError("benchmark m values must be >= 1")
        per_alg = {a: [] for a in algorithms}
        failed = {a: 0 for a in algorithms}
        for t in range(cfg.trials):
            for alg, vals in run_trial(cfg, m, t, algorithms).items():
                if vals is None:
                    failed[alg] += 1
                    capped = True
                else:
                    per_alg[alg].append(vals)
        for alg in algorithms:
            vals = np.array(per_alg[alg], dtype=float).reshape(-1, 5)
            means = vals.mean(axis=0) if len(vals) else np.full(5, np.nan)
            rows.append([m, alg, *(repr(float(v)) for v in means), cfg.trials, cfg.seed,
                         failed[alg], cfg.mode, cfg.matrix_mode])
    return rows, capped


def cmd_benchmark(cfg: RunConfig) -> int:
    rows, capped = benchmark_rows(cfg)
    if cfg.output:
        io.write_csv(cfg.output, BENCH_HEADER, rows)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(BENCH_HEADER)
        writer.writerows(rows)
    return CapExceeded.exit_code if capped else 0


COMMANDS = {
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "benchmark": cmd_benchmark,
    "enumerate": cmd_enumerate,
    "sample": cmd_sample,
}


# -- argument parsing -----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(ConfigError.exit_code)


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or comma list, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crowd-mle", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--mode", choices=MODES, default="filter")
        p.add_argument("--algorithm", choices=ALGORITHMS, default="opt")
        p.add_argument("--R", type=int)
        p.add_argument("--m", type=_int_list, default=[3], help="one value, or a sweep for benchmark")
        p.add_argument("--n", type=int, default=1000)
        p.add_argument("--selectivity", type=_float_list)
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--input")
        p.add_argument("--truth")
        p.add_argument("--output")
        p.add_argument("--max-iter", type=int, default=MAX_ITER)
        p.add_argument("--tol", type=float, default=TOL)
        p.add_argument("--cap", type=int)
        p.add_argument("--expert-prior", action="store_true")
        p.add_argument("--matrix-mode", choices=("better-than-random", "diagonally-dominant"))
        if name == "enumerate":
            p.add_argument("--list", dest="listing", action="store_true",
                           help="write every mapping to --output, one JSON line each")
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    try:
        cfg = RunConfig(**args)
        cfg.cap = enumeration_cap(cfg.cap)
        return COMMANDS[cfg.command](cfg)
    except CrowdMLEError as exc:
        sys.stderr.write(f"crowd-mle: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
