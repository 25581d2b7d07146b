"""Grid files and heatmap rendering.

Grid file layout (little endian):
    bytes 0..3    magic "DDK1"
    bytes 4..7    W, time frames (u32)
    bytes 8..11   H, frequency bins (u32)
    bytes 12..15  reserved, must be 0 (u32)
    bytes 16..    W*H float32, row-major (W rows of H values)

Values are float32 on disk, float64 in memory.
"""

from __future__ import annotations

import struct

import numpy as np

from .grids import as_grid

GRID_MAGIC = b"DDK1"
_HEADER = struct.Struct("<4sIII")


class GridFileError(ValueError):
    """Raised for malformed grid files; messages name the byte offset."""


def write_grid(path, x: np.ndarray) -> None:
    x = as_grid(x)
    w, h = x.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(GRID_MAGIC, w, h, 0))
        fh.write(np.ascontiguousarray(x, dtype="<f4").tobytes())


def read_grid(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise GridFileError(
            f"{path}: truncated header, {len(blob)} bytes < {_HEADER.size} (byte offset {len(blob)})"
        )
    magic, w, h, reserved = _HEADER.unpack_from(blob)
    if magic != GRID_MAGIC:
        raise GridFileError(f"{path}: bad magic {magic!r} at byte offset 0")
    if w < 1 or h < 1:
        raise GridFileError(f"{path}: invalid dimensions {w}x{h} at byte offset 4")
    if reserved != 0:
        raise GridFileError(f"{path}: reserved field {reserved} != 0 at byte offset 12")
    expected = _HEADER.size + 4 * w * h
    if len(blob) != expected:
        raise GridFileError(
            f"{path}: payload length {len(blob) - _HEADER.size} != {4 * w * h} "
            f"for {w}x{h} grid (byte offset {min(len(blob), expected)})"
        )
    payload = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size)
    x = payload.astype(np.float64).reshape(w, h)
    if not np.all(np.isfinite(x)):
        raise GridFileError(f"{path}: payload contains non-finite values")
    return x


def render_pgm(x: np.ndarray) -> bytes:
    """Binary PGM of the grid, frequency bins as rows (H rows by W columns).

    Linear min-max normalization to 0..255; a constant grid renders as
    mid-gray 128.
    """
    x = as_grid(x)
    w, h = x.shape
    lo, hi = float(x.min()), float(x.max())
    if hi > lo:
        levels = np.rint((x - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        levels = np.full(x.shape, 128, dtype=np.uint8)
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(levels.T).tobytes()


def write_pgm(path, x: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(render_pgm(x))
