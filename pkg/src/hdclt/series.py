"""Series matrices: validation, CSV I/O, centering.

A series matrix is a plain ``(n, p)`` float64 ndarray — ``n`` time points in
rows, ``p`` coordinates in columns.  Functions here (and every public entry
point of the package) run inputs through :func:`validate_series`; downstream
code never mutates a series it was handed.
"""

from __future__ import annotations

import csv
import hashlib
import math

import numpy as np

from .exceptions import DataFormatError

__all__ = ["validate_series", "load_csv", "save_csv", "center", "series_fingerprint"]


def validate_series(x, *, min_rows: int = 2) -> np.ndarray:
    """Coerce ``x`` to a float64 ``(n, p)`` array with n ≥ 2, p ≥ 1, all finite.

    Returns a new array when coercion copies; raises ``ValueError`` otherwise.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"series must be 2-dimensional, got shape {arr.shape}")
    n, p = arr.shape
    if n < min_rows:
        raise ValueError(f"series needs at least {min_rows} rows, got {n}")
    if p < 1:
        raise ValueError("series needs at least one column")
    if not np.isfinite(arr).all():
        r, c = (int(v) for v in np.argwhere(~np.isfinite(arr))[0])
        raise ValueError(f"series contains a non-finite entry at ({r}, {c})")
    return arr


def load_csv(path) -> np.ndarray:
    """Read a series matrix from ``path``.

    Expects one header row of column names followed by one data row per time
    point.  Errors carry enough position information to fix the file: ragged
    rows name the offending data row (1-based), unparseable or non-finite
    cells name (row, column-name).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: file is empty") from None
        names = [h.strip() for h in header]
        width = len(names)
        rows = []
        for i, record in enumerate(reader, start=1):
            if len(record) != width:
                raise DataFormatError(
                    f"{path}: row {i} has {len(record)} fields, expected {width}"
                )
            parsed = []
            for name, cell in zip(names, record):
                try:
                    value = float(cell)
                except ValueError:
                    raise DataFormatError(
                        f"{path}: cannot parse cell at (row {i}, col {name!r}): {cell!r}"
                    ) from None
                if not math.isfinite(value):
                    raise DataFormatError(
                        f"{path}: non-finite value at (row {i}, col {name!r}): {cell!r}"
                    )
                parsed.append(value)
            rows.append(parsed)
    if len(rows) < 2:
        raise DataFormatError(
            f"{path}: needs at least 2 data rows, got {len(rows)}"
        )
    return np.asarray(rows, dtype=np.float64)


def save_csv(x, path, columns: list[str] | None = None) -> None:
    """Write a series matrix with a header row; round-trips through load_csv."""
    arr = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if columns is None:
        columns = [f"x{j + 1}" for j in range(arr.shape[1])]
    if len(columns) != arr.shape[1]:
        raise ValueError("column names do not match matrix width")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in arr:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def center(series) -> np.ndarray:
    """Subtract column means; returns a new array."""
    x = validate_series(series)
    return x - x.mean(axis=0)


def series_fingerprint(series) -> str:
    """Short content hash of a series (shape + raw float bytes)."""
    x = np.ascontiguousarray(np.asarray(series, dtype=np.float64))
    h = hashlib.sha256()
    h.update(str(x.shape).encode())
    h.update(x.tobytes())
    return h.hexdigest()[:16]
