"""F32R: a tiny little-endian raster container for float32 arrays.

Layout (32-byte header, then the payload):

    bytes 0-3    magic "F32R"
    bytes 4-5    version, u16 (currently 1)
    bytes 6-7    kind, u16: 0 = field (meta = dz, dx), 1 = gather (meta = dt, receiver z)
    bytes 8-15   rows, cols as u32
    bytes 16-31  two f64 metadata slots, meaning set by kind
    payload      rows * cols float32, row-major

Also provides 8-bit PGM rendering of rasters for eyeballing results.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"F32R"
VERSION = 1
KIND_FIELD = 0
KIND_GATHER = 1

_HEADER = struct.Struct("<4sHHIIdd")


class FormatError(ValueError):
    """Malformed F32R input."""


@dataclass(frozen=True)
class F32RHeader:
    version: int
    kind: int
    rows: int
    cols: int
    meta: tuple[float, float]


def write_f32r(path, array, kind: int = KIND_FIELD, meta: tuple[float, float] = (0.0, 0.0)):
    """Serialize a 2D array as float32; values must be finite."""
    Path(path).write_bytes(f32r_bytes(array, kind, meta))


def f32r_bytes(array, kind: int = KIND_FIELD, meta: tuple[float, float] = (0.0, 0.0)) -> bytes:
    arr = np.ascontiguousarray(np.asarray(array, dtype="<f4"))
    if arr.ndim != 2:
        raise FormatError(f"F32R stores 2D arrays, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise FormatError("F32R stores finite values only")
    if kind not in (KIND_FIELD, KIND_GATHER):
        raise FormatError(f"unknown kind {kind}")
    rows, cols = arr.shape
    header = _HEADER.pack(MAGIC, VERSION, kind, rows, cols, float(meta[0]), float(meta[1]))
    return header + arr.tobytes()


def read_f32r(path) -> tuple[np.ndarray, F32RHeader]:
    return parse_f32r(Path(path).read_bytes())


def parse_f32r(blob: bytes) -> tuple[np.ndarray, F32RHeader]:
    if len(blob) < _HEADER.size:
        raise FormatError("file shorter than the F32R header")
    magic, version, kind, rows, cols, m0, m1 = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported F32R version {version}")
    if kind not in (KIND_FIELD, KIND_GATHER):
        raise FormatError(f"unknown kind {kind}")
    expected = rows * cols * 4
    payload = blob[_HEADER.size:]
    if len(payload) < expected:
        raise FormatError(
            f"truncated payload: header promises {expected} bytes, found {len(payload)}"
        )
    if len(payload) > expected:
        raise FormatError(f"{len(payload) - expected} trailing bytes after the payload")
    arr = np.frombuffer(payload, dtype="<f4").reshape(rows, cols).copy()
    return arr, F32RHeader(version, kind, rows, cols, (m0, m1))


def render_pgm(array) -> bytes:
    """Min-max normalized 8-bit grayscale PGM (P5); constant input maps to 128."""
    arr = np.asarray(array, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"can only render 2D arrays, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("cannot render non-finite values")
    lo, hi = float(arr.min()), float(arr.max())
    if hi == lo:
        pixels = np.full(arr.shape, 128, dtype=np.uint8)
    else:
        scaled = np.rint((arr - lo) / (hi - lo) * 255.0)
        pixels = np.clip(scaled, 0, 255).astype(np.uint8)
    rows, cols = arr.shape
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + pixels.tobytes()


def write_pgm(path, array):
    Path(path).write_bytes(render_pgm(array))
