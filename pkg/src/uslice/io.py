"""Reading and writing point clouds, rasters, traces and matrices."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .measures import DiscreteMeasure, MeasureError

RASTER_MAGIC = b"USOTGRID v1\n"


class FormatError(ValueError):
    """Malformed input file."""


def _fmt(x: float) -> str:
    # shortest round-trip repr, independent of locale
    return repr(float(x))


def read_point_cloud(path) -> DiscreteMeasure:
    """Read a ``x1,...,xd,w`` CSV file into a :class:`DiscreteMeasure`."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path} is not UTF-8 text") from exc
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    d = len(header) - 1
    if d < 1 or header[-1] != "w" or header[:-1] != [f"x{k}" for k in range(1, d + 1)]:
        raise FormatError(f"{path}: header must be x1,...,xd,w (got {','.join(header)})")
    data = np.empty((len(rows) - 1, d + 1))
    for k, row in enumerate(rows[1:]):
        if len(row) != d + 1:
            raise FormatError(f"{path}:{k + 2}: expected {d + 1} fields, got {len(row)}")
        try:
            data[k] = [float(c) for c in row]
        except ValueError as exc:
            raise FormatError(f"{path}:{k + 2}: {exc}") from exc
    try:
        return DiscreteMeasure(data[:, :d], data[:, d])
    except MeasureError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_point_cloud(path, points, weights):
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    d = points.shape[1]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{k}" for k in range(1, d + 1)] + ["w"])
        for x, wt in zip(points, np.asarray(weights, dtype=float)):
            w.writerow([_fmt(v) for v in x] + [_fmt(wt)])


def read_raster(path) -> np.ndarray:
    """Read a ``USOTGRID v1`` raster as a (rows, cols) float64 array."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    if not raw.startswith(RASTER_MAGIC):
        raise FormatError(f"{path}: not a USOTGRID v1 raster")
    end = raw.find(b"\n", len(RASTER_MAGIC))
    if end < 0:
        raise FormatError(f"{path}: truncated header")
    try:
        rows, cols = (int(v) for v in raw[len(RASTER_MAGIC):end].split())
    except ValueError as exc:
        raise FormatError(f"{path}: bad size line") from exc
    body = raw[end + 1:]
    if rows < 1 or cols < 1 or len(body) != 8 * rows * cols:
        raise FormatError(f"{path}: expected {rows}x{cols} float64 values")
    return np.frombuffer(body, dtype="<f8").reshape(rows, cols).astype(float)


def write_raster(path, values):
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("raster must be two-dimensional")
    rows, cols = values.shape
    with Path(path).open("wb") as fh:
        fh.write(RASTER_MAGIC)
        fh.write(f"{rows} {cols}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def write_trace(path, values, header=("iter", "dual_value")):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k, v in enumerate(values):
            w.writerow([k, _fmt(v)])


def write_matrix(path, matrix, labels):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["doc_id"] + list(labels))
        for name, row in zip(labels, np.asarray(matrix, dtype=float)):
            w.writerow([name] + [_fmt(v) for v in row])


def read_labels(path):
    """Read ``doc_id,label,split`` rows; split is ``train`` or ``test``."""
    try:
        with Path(path).open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    if not rows or not {"doc_id", "label", "split"} <= set(rows[0]):
        raise FormatError(f"{path}: expected columns doc_id,label,split")
    out = []
    for k, r in enumerate(rows):
        split = (r["split"] or "").strip()
        if split not in ("train", "test"):
            raise FormatError(f"{path}:{k + 2}: split must be train or test, got {split!r}")
        out.append(((r["doc_id"] or "").strip(), (r["label"] or "").strip(), split))
    return out


__all__ = [
    "FormatError", "read_point_cloud", "write_point_cloud", "read_raster", "write_raster",
    "write_trace", "write_matrix", "read_labels",
]
