"""CSV and JSON emission with fixed formatting and atomic replacement."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .kernel import KernelMatrix
from .model import FieldEnvelope, Grid, GridMismatch

FLOAT_FMT = "{:.17g}"
TIME_RTOL = 1e-9


def fmt(x) -> str:
    return FLOAT_FMT.format(float(x))


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def json_text(payload) -> str:
    return json.dumps(_plain(payload), indent=2, sort_keys=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if np.isfinite(value) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_all(outdir: str | Path, files: dict[str, str]) -> list[Path]:
    """Write every ``name -> text`` pair, each through a temp file and rename.

    Callers render all contents first so that a failure never leaves a
    partial set behind.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in files.items():
        target = outdir / name
        fd, tmp = tempfile.mkstemp(dir=outdir, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        written.append(target)
    return written


def envelope_csv(envelope: FieldEnvelope) -> str:
    rows = zip(envelope.grid.times, envelope.samples.real, envelope.samples.imag)
    return csv_text(["t", "re", "im"], rows)


def read_envelope(path: str | Path, grid: Grid) -> FieldEnvelope:
    """Load a ``t, re, im`` CSV whose times match the grid's time nodes."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != ["t", "re", "im"]:
            raise GridMismatch(f"{path}: expected header t,re,im, got {header}")
        data = np.array([[float(x) for x in row] for row in reader if row], dtype=float)
    if data.shape != (grid.n_t, 3):
        raise GridMismatch(f"{path}: expected {grid.n_t} rows of t,re,im, got shape {data.shape}")
    if not np.allclose(data[:, 0], grid.times, rtol=TIME_RTOL, atol=TIME_RTOL * grid.duration):
        raise GridMismatch(f"{path}: sample times do not match the grid's time nodes")
    return FieldEnvelope(data[:, 1] + 1j * data[:, 2], grid)


def kernel_csv(kernel: KernelMatrix) -> str:
    """Dense row-major kernel; first row and column carry the axis coordinates."""
    grid = kernel.grid
    coords = {
        "t_out": grid.times,
        "t_in": grid.times,
        "t_in_reversed": grid.times,
        "z": grid.positions,
    }
    header = [f"{kernel.row_axis}\\{kernel.col_axis}"] + [fmt(x) for x in coords[kernel.col_axis]]
    rows = ([r, *line] for r, line in zip(coords[kernel.row_axis], kernel.entries))
    return csv_text(header, rows)


def read_kernel_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row coordinates, column coordinates and entries of a kernel CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        body = np.array([[float(x) for x in row] for row in reader], dtype=float)
    cols = np.array([float(x) for x in header[1:]])
    return body[:, 0], cols, body[:, 1:]
