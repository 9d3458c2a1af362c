"""CSV readers for the solver's documented output schemas.

The plot scripts consume these files verbatim and never recompute any
physics; every number in a figure comes from a CSV cell.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """CSV file does not match the documented schema."""


def _read(path, expected_header):
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file not found")
    comments = []
    with open(path) as fh:
        rows = []
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                comments.append(line[1:].strip())
                continue
            rows.append(line.split(","))
    if not rows or rows[0] != expected_header:
        got = rows[0] if rows else []
        raise SchemaError(f"{path}: expected header {expected_header}, got {got}")
    body = rows[1:]
    if not body:
        raise SchemaError(f"{path}: no data rows")
    return comments, body


def read_effective_germ(path):
    """-> (bars dict, lambda array, hat1 array, hat2 array)."""
    comments, body = _read(path, ["lambda", "hat1", "hat2"])
    bars = {}
    for c in comments:
        for key, val in re.findall(r"(bar[012])=([-0-9.eE+]+)", c):
            bars[key] = float(val)
    data = np.array([[float(v) for v in r] for r in body])
    return bars, data[:, 0], data[:, 1], data[:, 2]


def read_convergence(path):
    """-> (eps array, error array), sorted by decreasing eps."""
    _, body = _read(path, ["eps", "l1_error"])
    data = np.array(sorted(([float(a), float(b)] for a, b in body), reverse=True))
    return data[:, 0], data[:, 1]


def read_snapshots(run_dir):
    """All snapshot_<t>.csv in a run directory -> (times, per-branch arrays).

    Returns (ts, xs[3], rho[3]) where rho[j] has shape (len(ts), len(xs[j])).
    """
    run_dir = Path(run_dir)
    files = []
    for p in sorted(run_dir.glob("snapshot_*.csv")):
        m = re.fullmatch(r"snapshot_([-0-9.eE+]+)\.csv", p.name)
        if m:
            files.append((float(m.group(1)), p))
    if not files:
        raise SchemaError(f"{run_dir}: no snapshot_<t>.csv files")
    files.sort()
    ts, frames = [], []
    for t, p in files:
        _, body = _read(p, ["x", "branch", "rho"])
        per_branch = {0: [], 1: [], 2: []}
        for x, j, v in body:
            per_branch[int(j)].append((float(x), float(v)))
        frames.append(per_branch)
        ts.append(t)
    xs = [np.array([x for x, _ in frames[0][j]]) for j in range(3)]
    rho = [
        np.array([[v for _, v in frame[j]] for frame in frames]) for j in range(3)
    ]
    for j in range(3):
        if any(len(frame[j]) != len(xs[j]) for frame in frames):
            raise SchemaError(f"{run_dir}: snapshots disagree on the branch-{j} grid")
    return np.array(ts), xs, rho


def read_corrector(path):
    """corrector.csv -> dict branch -> (ts, xs, u) with u shaped (nt, nx)."""
    _, body = _read(path, ["t", "x", "branch", "u"])
    cells = {0: {}, 1: {}, 2: {}}
    for t, x, j, u in body:
        cells[int(j)][(float(t), float(x))] = float(u)
    out = {}
    for j, d in cells.items():
        if not d:
            continue
        ts = np.array(sorted({t for t, _ in d}))
        xs = np.array(sorted({x for _, x in d}))
        u = np.array([[d[(t, x)] for x in xs] for t in ts])
        out[j] = (ts, xs, u)
    return out
