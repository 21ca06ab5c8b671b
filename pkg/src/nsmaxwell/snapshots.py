"""Binary field snapshot format.

Layout (all little-endian):
    magic   4 bytes  b"NSMW"
    version u32      currently 1
    d       u32
    n       u32
    L       f64      box period
    time    f64
    data    3 * n^d complex128, row-major with the first spatial axis
            slowest, components consecutive.
"""

from __future__ import annotations

import struct

import numpy as np

from .grid import Grid, SpectralField

__all__ = ["write_snapshot", "read_snapshot", "SnapshotError", "FORMAT_VERSION"]

MAGIC = b"NSMW"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIII dd")


class SnapshotError(ValueError):
    pass


def write_snapshot(path, field: SpectralField, time: float = 0.0) -> None:
    grid = field.grid
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, grid.d, grid.n,
                          grid.box_length, time)
    data = np.ascontiguousarray(field.coeffs, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes(order="C"))


def read_snapshot(path):
    """Returns (field, time); rejects bad magic and unknown versions."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise SnapshotError("truncated snapshot header")
        magic, version, d, n, L, time = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise SnapshotError(f"bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise SnapshotError(f"unknown snapshot version {version}")
        grid = Grid(d, n, L)
        count = 3 * n**d
        data = np.frombuffer(fh.read(count * 16), dtype="<c16")
        if data.size != count:
            raise SnapshotError("truncated snapshot payload")
        coeffs = data.reshape((3,) + grid.shape).astype(np.complex128)
    return SpectralField(grid, coeffs.copy()), time
