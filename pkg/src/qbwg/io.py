"""CSV and JSON writers shared by the command line and the figure bundles.

CSV files carry a header row, 17 significant digits, '.' decimals and Unix
newlines, so values round-trip exactly and reruns diff cleanly.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = ["format_value", "write_csv", "write_rows", "read_csv", "write_json",
           "trajectory_columns"]


def format_value(x) -> str:
    """Text form of one CSV cell; ``None`` and NaN become an empty field."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if math.isnan(x):
            return ""
        return format(float(x), ".17g")
    return str(x)


def write_csv(path, columns: Mapping[str, Sequence]) -> Path:
    """Write equal-length columns, in mapping order, to ``path``."""
    names = list(columns)
    lengths = {len(columns[k]) for k in names}
    if len(lengths) > 1:
        raise ValueError(f"columns have different lengths: {sorted(lengths)}")
    rows = zip(*(columns[k] for k in names))
    return write_rows(path, names, ([r[i] for i in range(len(names))] for r in rows))


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(x) for x in row])
    return path


def read_csv(path) -> dict[str, list[str]]:
    """Columns of a CSV file as raw strings keyed by header name."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {h: [] for h in header}
        for row in reader:
            for h, v in zip(header, row):
                cols[h].append(v)
    return cols


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def write_json(path, payload: Mapping) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False, default=_json_default)
        fh.write("\n")
    return path


def trajectory_columns(traj, series) -> dict[str, np.ndarray]:
    """Standard trajectory table: amplitudes, populations and observables."""
    return {
        "t": traj.times,
        "re_c1": traj.c1.real,
        "im_c1": traj.c1.imag,
        "re_c2": traj.c2.real,
        "im_c2": traj.c2.imag,
        "pop1": series.pop1,
        "pop2": series.pop2,
        "energy": series.energy,
        "ergotropy": series.ergotropy,
        "charger_energy": series.charger_energy,
    }
