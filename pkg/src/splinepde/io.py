"""Field CSV reading and writing.

Layout: the first row holds the spatial knots (after a corner cell), each
following row one time sample whose first cell is the time knot.

    t\\x, 0.01, 0.02, ...
    0.001, u(0.01, 0.001), u(0.02, 0.001), ...
"""

from __future__ import annotations

import csv

import numpy as np

from .types import MIN_KNOTS, Field, Grid1D

MONTH = 1.0 / 12.0


class DataError(ValueError):
    """Malformed input data; messages name the offending row or column."""


def write_field_csv(field: Field, path, corner: str = "t\\x") -> None:
    """Write with ``repr`` floats so a read-back is bit-exact."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([corner] + [repr(float(x)) for x in field.grid.x])
        for n, t in enumerate(field.grid.t):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in field.values[:, n]])


def _float(cell: str):
    try:
        v = float(cell)
    except ValueError:
        return None
    return v


def _read_rows(path) -> list[list[str]]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: file is empty")
    return [[c.strip() for c in r] for r in rows]


def ingest_csv(path, time_step: float = MONTH) -> Field:
    """Read a spatial-header table into a Field.

    The header's spatial coordinates are sorted ascending (columns permuted
    to match). A first column of time labels is detected from a blank or
    non-numeric corner cell; numeric labels become the time knots,
    otherwise (or without labels) t_n = n * time_step.
    """
    rows = _read_rows(path)
    header, body = rows[0], rows[1:]
    corner = header[0]
    has_labels = corner == "" or _float(corner) is None
    if not has_labels and body and len(body[0]) == len(header) + 1:
        has_labels = True
        header = [""] + header
    xs_cells = header[1:] if has_labels else header
    x = []
    for j, c in enumerate(xs_cells):
        v = _float(c)
        if v is None:
            raise DataError(f"{path}: header column {j + 1} is not numeric: {c!r}")
        x.append(v)
    x = np.array(x)
    width = len(header)
    values, labels = [], []
    for r, row in enumerate(body, start=2):
        if len(row) != width:
            raise DataError(f"{path}: row {r} has {len(row)} cells, expected {width}")
        cells = row[1:] if has_labels else row
        if has_labels:
            labels.append(row[0])
        vals = []
        for j, c in enumerate(cells):
            v = _float(c)
            if v is None or not np.isfinite(v):
                raise DataError(f"{path}: row {r}, column {j + 1 + has_labels}: bad value {c!r}")
            vals.append(v)
        values.append(vals)
    if len(values) < MIN_KNOTS or x.size < MIN_KNOTS:
        raise DataError(f"{path}: need at least {MIN_KNOTS} time rows and spatial columns, "
                        f"got {len(values)} x {x.size}")
    U = np.array(values).T          # (M, N)
    order = np.argsort(x, kind="stable")
    x, U = x[order], U[order]
    numeric = [_float(l) for l in labels]
    if has_labels and all(v is not None for v in numeric):
        t = np.array(numeric)
    else:
        t = time_step * np.arange(U.shape[1])
    try:
        grid = Grid1D(x, t)
    except ValueError as e:
        raise DataError(f"{path}: {e}") from None
    return Field(grid, U)


def read_field_csv(path) -> Field:
    """Strict reader for files written by :func:`write_field_csv`."""
    rows = _read_rows(path)
    if rows[0][0] != "" and _float(rows[0][0]) is not None:
        raise DataError(f"{path}: first cell must be a corner label, not a number")
    for r, row in enumerate(rows[1:], start=2):
        if _float(row[0]) is None:
            raise DataError(f"{path}: row {r} has a non-numeric time knot {row[0]!r}")
    return ingest_csv(path)


def synthetic_monthly_table(seed: int = 7, sigma: float = 0.3, years: int = 2,
                            drift: float = 60.0):
    """Monthly temperature-like table on 72 longitudes (-177.5 .. 177.5, 5 deg).

    A zonal pattern drifting east at ``drift`` degrees per year (so
    u_t = -drift * u_x) plus Gaussian noise. Returns (longitudes, labels,
    values) with values shaped (12 * years, 72).
    """
    lon = -177.5 + 5.0 * np.arange(72)
    months = np.arange(12 * years)
    t = months / 12.0
    k = 2 * np.pi / 360.0
    L, T = np.meshgrid(lon, t)
    S = L - drift * T
    clean = -46.0 + 2.5 * np.sin(3 * k * S) + 1.5 * np.cos(k * S)
    rng = np.random.default_rng(seed)
    vals = clean + sigma * rng.standard_normal(clean.shape)
    names = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"]
    labels = [f"{names[m % 12]} {2017 + m // 12}" for m in months]
    return lon, labels, vals


def write_table_csv(path, lon, labels, values) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([""] + [repr(float(x)) for x in lon])
        for lab, row in zip(labels, values):
            w.writerow([lab] + [repr(float(v)) for v in row])
