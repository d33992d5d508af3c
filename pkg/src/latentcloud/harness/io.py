"""CSV/JSON artifact I/O with exact numeric round-trips.

Floats are written with 17 significant digits so that save-then-load is
bit-identical; JSON artifacts are dumped with sorted keys and fixed
separators so reruns produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

__all__ = ["save_matrix", "load_matrix", "save_distance_matrix",
           "load_distance_matrix", "save_json", "load_json", "write_manifest"]


def save_matrix(path, values: np.ndarray, header: list[str] | None = None) -> None:
    """Write a 2D array as CSV, 17-significant-digit floats, no header by default."""
    v = np.atleast_2d(np.asarray(values, dtype=float))
    with open(path, "w") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in v:
            fh.write(",".join("%.17g" % x for x in row) + "\n")


def load_matrix(path, expected_cols: int | None = None,
                skip_header: bool = False) -> np.ndarray:
    """Read a rectangular numeric CSV; errors name the offending row."""
    rows = []
    width = expected_cols
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if skip_header and lineno == 1:
                continue
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            if len(cells) != width:
                raise ValueError(
                    f"{path}: row {lineno} has {len(cells)} columns, expected {width}")
            try:
                rows.append([float(c) for c in cells])
            except ValueError as err:
                raise ValueError(f"{path}: row {lineno} has a non-numeric cell: {err}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def save_distance_matrix(path, d: np.ndarray, lower_triangle: bool = False) -> None:
    """Write a symmetric distance matrix, full square or lower triangle."""
    d = np.asarray(d, dtype=float)
    if not lower_triangle:
        save_matrix(path, d)
        return
    with open(path, "w") as fh:
        for i in range(d.shape[0]):
            fh.write(",".join("%.17g" % x for x in d[i, : i + 1]) + "\n")


def load_distance_matrix(path, lower_triangle: bool = False) -> np.ndarray:
    if not lower_triangle:
        return load_matrix(path)
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(c) for c in line.split(",")])
    n = len(rows)
    d = np.zeros((n, n))
    for i, row in enumerate(rows):
        if len(row) != i + 1:
            raise ValueError(f"{path}: row {i + 1} has {len(row)} cells, expected {i + 1}")
        d[i, : i + 1] = row
    return np.maximum(d, d.T)


def save_json(path, obj: dict) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, separators=(",", ": "))
        fh.write("\n")


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_manifest(out_dir, exclude: tuple[str, ...] = ("manifest.json", "report.json")) -> Path:
    """List artifact files with SHA-256 digests; reruns must reproduce it."""
    out_dir = Path(out_dir)
    files = {}
    for f in sorted(out_dir.iterdir()):
        if f.is_file() and f.name not in exclude:
            files[f.name] = hashlib.sha256(f.read_bytes()).hexdigest()
    path = out_dir / "manifest.json"
    save_json(path, {"files": files})
    return path
