"""CSV and JSON artifact serialization.

All numeric CSV output uses 17 significant digits so float64 values round-trip
exactly. Comment lines start with '#'. Manifests are JSON with sorted keys and
no timestamps, so reruns with identical parameters produce identical bytes.
"""

from __future__ import annotations

import json
import os
from typing import Any

import numpy as np

FLOAT_FMT = "%.17g"


def format_float(x: float) -> str:
    return FLOAT_FMT % float(x)


def write_matrix_csv(path, m: np.ndarray, comments: list[str] | None = None) -> None:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    lines = [f"# {c}" for c in (comments or [])]
    for row in m:
        lines.append(",".join(format_float(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged rows")
    return np.array(rows, dtype=float)


def write_table_csv(path, columns: dict[str, np.ndarray], comments: list[str] | None = None) -> None:
    """Named-column CSV: one '# <name1>,<name2>,...' header line after comments."""
    names = list(columns)
    cols = [np.asarray(columns[k]) for k in names]
    length = len(cols[0])
    if any(len(c) != length for c in cols):
        raise ValueError("columns must share a length")
    lines = [f"# {c}" for c in (comments or [])]
    lines.append("# " + ",".join(names))
    for k in range(length):
        cells = []
        for c in cols:
            v = c[k]
            if isinstance(v, (bool, np.bool_)):
                cells.append("1" if v else "0")
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(format_float(v))
        lines.append(",".join(cells))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_manifest(path, payload: dict[str, Any]) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict[str, Any]:
    with open(path) as fh:
        return json.load(fh)


def ensure_dir(path) -> None:
    os.makedirs(path, exist_ok=True)
