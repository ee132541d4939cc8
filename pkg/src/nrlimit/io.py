"""Binary spectral snapshots and CSV writers.

Snapshot layout (little-endian)::

    bytes 0-3   magic b"NRLB"
    u32         version (1)
    u32         dim
    u32         n
    f64 pairs   (re, im) of the unitary spectral coefficients, C order
"""
from __future__ import annotations

import csv
import io
import struct
from pathlib import Path

import numpy as np

from .grid import Field, Grid, make_grid

__all__ = ["MAGIC", "VERSION", "write_snapshot", "read_snapshot", "snapshot_bytes", "write_csv"]

MAGIC = b"NRLB"
VERSION = 1
_HEADER = struct.Struct("<4sIII")


def snapshot_bytes(field: Field) -> bytes:
    g = field.grid
    body = np.ascontiguousarray(field.spectral, dtype="<c16").tobytes()
    return _HEADER.pack(MAGIC, VERSION, g.dim, g.n) + body


def write_snapshot(path, field: Field) -> None:
    Path(path).write_bytes(snapshot_bytes(field))


def read_snapshot(path, length: float = 2.0 * np.pi) -> Field:
    """Read a snapshot; the torus length is not stored and must be supplied."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError("file too short for an NRLB header")
    magic, version, dim, n = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    grid: Grid = make_grid(dim, n, length)
    count = n**dim
    body = data[_HEADER.size:]
    if len(body) != 16 * count:
        raise ValueError(f"expected {16 * count} payload bytes, found {len(body)}")
    coeffs = np.frombuffer(body, dtype="<c16").reshape(grid.shape).astype(complex)
    return Field.from_spectral(grid, coeffs)


def write_csv(rows, header, path=None) -> str:
    """Write rows (already formatted strings or numbers) and return the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
