"""Artifact persistence: the PSFLD1 binary field dump, CSV traces and JSON
reports, all written atomically (write to a temp file, then rename).

PSFLD1 layout, little-endian: the magic bytes b"PSFLD1", int64 k, n_r,
n_theta, float64 R, d, then k blocks of (n_r+1)*n_theta float64 node values in
ring-major, theta-minor order with the center ring (ring 0, the center value
replicated n_theta times) first.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np

from .fields import FieldSet
from .geometry import DiskGrid

MAGIC = b"PSFLD1"


def _atomic_write(path, payload: bytes):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_fields(path, fields):
    grid = fields.grid
    head = MAGIC + struct.pack(
        "<qqqdd", fields.k, grid.n_r, grid.n_theta, grid.R, float(fields.d)
    )
    body = np.ascontiguousarray(fields.values, dtype="<f8").tobytes()
    _atomic_write(path, head + body)


def read_fields(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a PSFLD1 dump")
    off = len(MAGIC)
    k, n_r, n_theta, R, d = struct.unpack_from("<qqqdd", raw, off)
    off += struct.calcsize("<qqqdd")
    count = k * (n_r + 1) * n_theta
    values = np.frombuffer(raw, dtype="<f8", count=count, offset=off)
    if values.size != count:
        raise ValueError(f"{path}: truncated dump")
    values = values.reshape(k, n_r + 1, n_theta).copy()
    d_grid = d if abs(d - round(d)) > 1e-12 else int(round(d))
    grid = DiskGrid(R, int(n_r), int(n_theta), d_grid)
    return FieldSet(grid, d_grid, values)


def write_csv(path, header, rows):
    """Deterministic CSV: fixed %.17g formatting, newline-terminated rows."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(
                format(v, ".17g") if isinstance(v, float) else str(v) for v in row
            )
        )
    _atomic_write(path, ("\n".join(lines) + "\n").encode())


def read_csv(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    header = lines[0].split(",")
    rows = [[float(x) for x in ln.split(",")] for ln in lines[1:]]
    return header, rows


def write_json(path, obj):
    _atomic_write(path, (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode())


def trace_rows(trace):
    return [list(row) for row in trace.rows()]


def write_trace_csv(path, trace):
    write_csv(path, ["r", "H", "E", "Ehat", "N", "coupling"], trace_rows(trace))


def write_energy_csv(path, energy_trace):
    write_csv(path, ["t", "E"], [[float(t), float(E)] for t, E in energy_trace])


def write_profile_csv(path, profile):
    rows = list(zip(profile.x, profile.u, profile.v))
    write_csv(path, ["x", "u", "v"], [[float(a), float(b), float(c)] for a, b, c in rows])
