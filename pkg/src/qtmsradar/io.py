"""File formats.

Covariance matrix (CSV)
    Row-major, 16 comma-separated values, either on one line or as four rows
    of four.  Lines starting with ``#`` are comments; writers emit
    ``# channels: i1,q1,i2,q2``.
Covariance matrix (JSON)
    A 4x4 array of arrays in the same channel order.
Snapshot series (CSV)
    Four columns ``i1,q1,i2,q2``, one snapshot per line, optional header line
    with exactly those names, ``#`` comments allowed.
rho_hat series (CSV)
    Single column with header ``rho_hat``.
ROC (CSV)
    Columns ``p_fa,p_d,threshold``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import warnings
from pathlib import Path

import numpy as np

from .covariance import CHANNELS, check_symmetric, symmetrize
from .errors import DataError

CHANNEL_HEADER = "# channels: " + ",".join(CHANNELS)


def write_cov_csv(path, m) -> None:
    m = np.asarray(m, dtype=float)
    with open(path, "w") as fh:
        fh.write(CHANNEL_HEADER + "\n")
        fh.write(",".join(repr(float(v)) for v in m.ravel()) + "\n")


def write_cov_json(path, m) -> None:
    Path(path).write_text(json.dumps(np.asarray(m, dtype=float).tolist()))


def read_cov(path) -> np.ndarray:
    """Read a 4x4 matrix from CSV or JSON (by extension); symmetrized."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        try:
            values = np.asarray(json.loads(text), dtype=float)
        except (ValueError, TypeError) as exc:
            raise DataError(f"{path}: not a numeric JSON array ({exc})") from exc
    else:
        values = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            for cell in line.split(","):
                try:
                    values.append(float(cell))
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: non-numeric cell {cell.strip()!r}") from exc
        values = np.asarray(values)
    if values.size != 16:
        raise DataError(f"{path}: expected 16 values, found {values.size}")
    m = values.reshape(4, 4)
    try:
        check_symmetric(m, atol=1e-9 * max(float(np.max(np.abs(m))), 1.0))
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc
    return symmetrize(m)


def write_snapshots_csv(path, snapshots, header: bool = True) -> None:
    x = np.asarray(snapshots, dtype=float)
    np.savetxt(path, x, delimiter=",", fmt="%.17g",
               header=",".join(CHANNELS) if header else "", comments="")


def _scan_rows(path):
    # slow path: locate the first malformed line for the error message
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            cells = [c.strip() for c in row]
            if [c.lower() for c in cells] == list(CHANNELS):
                continue
            if len(cells) != 4:
                raise DataError(f"{path}:{lineno}: expected 4 columns, found {len(cells)}")
            for cell in cells:
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: non-numeric cell {cell!r}") from None
                if not np.isfinite(value):
                    raise DataError(f"{path}:{lineno}: non-finite value {cell!r}")
    raise DataError(f"{path}: could not parse snapshot file")


def read_snapshots_csv(path) -> np.ndarray:
    """Read a 4-column snapshot file into an ``(n, 4)`` array.

    Malformed rows raise :class:`DataError` naming the line number.
    """
    path = Path(path)
    with open(path) as fh:
        first = ""
        for line in fh:
            if line.strip() and not line.lstrip().startswith("#"):
                first = line
                break
    skip = 0
    if first and [c.strip().lower() for c in first.split(",")] == list(CHANNELS):
        skip = 1
    try:
        with open(path) as fh:
            lines = (ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#"))
            if skip:
                next(lines, None)
            with warnings.catch_warnings():
                # a header-only file is a valid empty series
                warnings.simplefilter("ignore", UserWarning)
                data = np.loadtxt(lines, delimiter=",", ndmin=2)
    except ValueError:
        _scan_rows(path)
        raise
    if data.size == 0:
        return np.empty((0, 4))
    if data.shape[1] != 4 or not np.all(np.isfinite(data)):
        _scan_rows(path)
    return data


def write_rho_csv(path, rho_hats) -> None:
    np.savetxt(path, np.asarray(rho_hats, dtype=float), fmt="%.17g", header="rho_hat", comments="")


def read_rho_csv(path) -> np.ndarray:
    return np.atleast_1d(np.loadtxt(path, skiprows=1, ndmin=1))


def roc_to_csv(p_fa, p_d, threshold) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p_fa", "p_d", "threshold"])
    for row in zip(p_fa, p_d, threshold):
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def roc_to_json(p_fa, p_d, threshold, **meta) -> str:
    return json.dumps({
        **meta,
        "p_fa": [float(v) for v in p_fa],
        "p_d": [float(v) for v in p_d],
        "threshold": [float(v) for v in threshold],
    })
