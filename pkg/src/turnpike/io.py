"""Trajectory CSV and JSON report I/O."""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ProblemSpecError
from .shooting import Extremal


def trajectory_header(n: int, m: int) -> list[str]:
    return ["t"] + [f"x{i + 1}" for i in range(n)] + [f"lam{i + 1}" for i in range(n)] + [f"u{i + 1}" for i in range(m)]


def format_trajectory(e: Extremal) -> str:
    n, m = e.x.shape[1], e.u.shape[1]
    buf = io.StringIO()
    buf.write(",".join(trajectory_header(n, m)) + "\n")
    rows = np.hstack([e.t[:, None], e.x, e.lam, e.u])
    for row in rows:
        buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return buf.getvalue()


def write_trajectory(e: Extremal, path=None) -> None:
    text = format_trajectory(e)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def read_trajectory(path) -> Extremal:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader if row])
    if not header or header[0] != "t":
        raise ProblemSpecError(f"{path}: first column must be 't'")
    n = sum(1 for h in header if h.startswith("x"))
    m = sum(1 for h in header if h.startswith("u"))
    if header != trajectory_header(n, m) or data.ndim != 2 or data.shape[1] != len(header):
        raise ProblemSpecError(f"{path}: header does not match the trajectory schema")
    return Extremal(
        t=data[:, 0],
        x=data[:, 1:1 + n],
        lam=data[:, 1 + n:1 + 2 * n],
        u=data[:, 1 + 2 * n:],
        Gamma=np.zeros(0),
        boundary_residual=float("nan"),
        method="file",
    )


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, default=_default)


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
