"""CSV and JSON formats used by the command line.

Counts CSV: ``item_id,c1,...,cR`` where ``cr`` counts rating r.  Filtering
files may instead use ``c0,c1`` for the number of "0" and "1" answers.
Raw CSV: ``item_id,worker_id,rating[,class]``.  Truth CSV: ``item_id,truth``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .core import ConfusionMatrix, Dataset
from .errors import InputError
from .extensions import TwoClassDataset
from .synth import dataset_from_raw

SCHEMA_VERSION = 1


def _read_rows(path) -> tuple:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise InputError(f"{path}: empty file, header expected")
        rows = [(lineno, row) for lineno, row in enumerate(reader, start=2) if row]
    return [h.strip() for h in header], rows


def _int(value: str, path, lineno: int, what: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise InputError(f"{path}:{lineno}: {what} {value!r} is not an integer") from None


def is_raw(path) -> bool:
    header, _ = _read_rows(path)
    return "worker_id" in header


def count_columns(header: list) -> tuple:
    """``(R, binary)`` for a counts header; binary files use c0,c1."""
    names = header[1:]
    if names and names[0] == "c0":
        expected, binary = [f"c{k}" for k in range(len(names))], True
    else:
        expected, binary = [f"c{k}" for k in range(1, len(names) + 1)], False
    if header[0] != "item_id" or names != expected or len(names) < 2:
        raise InputError(f"counts header must be item_id,c1,...,cR (or c0,c1); got {','.join(header)}")
    return len(names), binary


def read_counts(path, fixed_m: bool = True, truth: Optional[dict] = None) -> Dataset:
    header, rows = _read_rows(path)
    R, _ = count_columns(header)
    if not rows:
        raise InputError(f"{path}: no items")
    items, seen = [], set()
    for lineno, row in rows:
        if len(row) != R + 1:
            raise InputError(f"{path}:{lineno}: expected {R + 1} fields, got {len(row)}")
        item_id = row[0]
        if item_id in seen:
            raise InputError(f"{path}:{lineno}: duplicate item {item_id!r}")
        seen.add(item_id)
        counts = [_int(v, path, lineno, "count") for v in row[1:]]
        if any(c < 0 for c in counts):
            raise InputError(f"{path}:{lineno}: negative count")
        items.append((item_id, tuple(counts[::-1])))
    return Dataset(R, items, truth, None, fixed_m)


def read_raw(path, R: int, truth: Optional[dict] = None, fixed_m: bool = True,
             binary: bool = False) -> Dataset:
    """Rows ``item_id,worker_id,rating``; binary answers 0/1 become ratings 1/2."""
    header, rows = _read_rows(path)
    if header[:3] != ["item_id", "worker_id", "rating"]:
        raise InputError(f"raw header must start item_id,worker_id,rating; got {','.join(header)}")
    if not rows:
        raise InputError(f"{path}: no rows")
    out = []
    for lineno, row in rows:
        if len(row) < 3:
            raise InputError(f"{path}:{lineno}: expected at least 3 fields")
        r = _int(row[2], path, lineno, "rating") + (1 if binary else 0)
        if not 1 <= r <= R:
            raise InputError(f"{path}:{lineno}: rating {row[2]} out of range")
        out.append((row[0], row[1], r))
    return dataset_from_raw(out, R, truth, fixed_m)


def read_two_class(path, truth: Optional[dict] = None) -> TwoClassDataset:
    header, rows = _read_rows(path)
    if header != ["item_id", "worker_id", "rating", "class"]:
        raise InputError(f"two-class input needs item_id,worker_id,rating,class; got {','.join(header)}")
    if not rows:
        raise InputError(f"{path}: no rows")
    parsed = []
    for lineno, row in rows:
        if len(row) != 4:
            raise InputError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
        parsed.append((row[0], row[1], _int(row[2], path, lineno, "rating"), row[3].strip()))
    return TwoClassDataset.from_raw(parsed, truth)


def read_truth(path, binary: bool) -> dict:
    header, rows = _read_rows(path)
    if header != ["item_id", "truth"]:
        raise InputError(f"truth header must be item_id,truth; got {','.join(header)}")
    return {row[0]: _int(row[1], path, lineno, "truth") + (1 if binary else 0) for lineno, row in rows}


def write_csv(path, header: list, rows: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_counts(path, dataset: Dataset, binary: bool) -> None:
    R = dataset.R
    names = ["c0", "c1"] if binary else [f"c{r}" for r in range(1, R + 1)]
    write_csv(path, ["item_id", *names], [[i, *c[::-1]] for i, c in dataset.items])


def write_raw(path, dataset: Dataset, binary: bool) -> None:
    shift = 1 if binary else 0
    write_csv(path, ["item_id", "worker_id", "rating"],
              [[i, w, r - shift] for i, w, r in dataset.raw])


def write_truth(path, truth: dict, binary: bool) -> None:
    shift = 1 if binary else 0
    write_csv(path, ["item_id", "truth"], [[i, t - shift] for i, t in truth.items()])


def encode_float(x: float):
    """JSON-safe float; infinities become string tokens."""
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    if math.isnan(x):
        return "nan"
    return float(x)


def decode_float(x) -> float:
    return float(x)  # float("-inf") parses the token


def matrix_json(p: ConfusionMatrix) -> dict:
    return {
        "R": p.R,
        "rows": [[float(v) for v in row] for row in p.p],
        "undefined_columns": [bool(u) for u in (p.undefined or (False,) * p.R)],
    }


def matrix_from_json(obj: dict) -> ConfusionMatrix:
    rows = np.array(obj["rows"], dtype=float)
    if rows.shape != (obj["R"], obj["R"]):
        raise InputError("matrix JSON rows do not match R")
    return ConfusionMatrix(rows, tuple(obj.get("undefined_columns", ())))


def dump_json(obj, path=None) -> str:
    text = json.dumps({"schema_version": SCHEMA_VERSION, **obj}, sort_keys=True, indent=2) + "\n"
    if path is not None:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    return text
