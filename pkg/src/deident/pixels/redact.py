"""Rectangular redaction of native (uncompressed) pixel data."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


class GeometryMismatch(ValueError):
    pass


class Geometry(NamedTuple):
    rows: int
    cols: int
    samples: int = 1
    bits_allocated: int = 8
    planar: int = 0
    frames: int = 1
    photometric: str = "MONOCHROME2"
    pixel_representation: int = 0

    @property
    def frame_bytes(self) -> int:
        return self.rows * self.cols * self.samples * self.bits_allocated // 8

    @property
    def expected_bytes(self) -> int:
        return self.frame_bytes * self.frames


def fill_value(fill: str | int, geometry: Geometry) -> int:
    """MIDGRAY is 2^(bits-1); BLACK is the photometric minimum."""
    bits = geometry.bits_allocated
    if isinstance(fill, int):
        return fill
    signed = geometry.pixel_representation == 1
    if fill == "MIDGRAY":
        return 0 if signed else 1 << (bits - 1)
    if fill == "BLACK":
        if geometry.photometric == "MONOCHROME1":
            return (1 << (bits - 1)) - 1 if signed else (1 << bits) - 1
        return -(1 << (bits - 1)) if signed else 0
    raise ValueError(f"unknown fill {fill!r}")


def _dtype(geometry: Geometry):
    kinds = {8: "u1", 16: "<u2", 32: "<u4"}
    if geometry.bits_allocated not in kinds:
        raise GeometryMismatch(f"{geometry.bits_allocated} bits allocated is not supported")
    dt = kinds[geometry.bits_allocated]
    return np.dtype(dt.replace("u", "i")) if geometry.pixel_representation == 1 else np.dtype(dt)


def as_array(pixels: bytes, geometry: Geometry) -> np.ndarray:
    """(frames, samples, rows, cols) view regardless of planar configuration."""
    if len(pixels) < geometry.expected_bytes or len(pixels) > geometry.expected_bytes + 1:
        raise GeometryMismatch(f"{len(pixels)} bytes for geometry needing {geometry.expected_bytes}")
    g = geometry
    arr = np.frombuffer(pixels[:g.expected_bytes], dtype=_dtype(g))
    if g.planar:
        return arr.reshape(g.frames, g.samples, g.rows, g.cols)
    return arr.reshape(g.frames, g.rows, g.cols, g.samples).transpose(0, 3, 1, 2)


def redact_uncompressed(pixels: bytes, geometry: Geometry, regions, fill: str | int = "MIDGRAY") -> bytes:
    """Set every sample inside ``regions`` to the fill level; all others are untouched."""
    g = geometry
    arr = as_array(pixels, g)
    regions = [r for r in regions if r[2] > 0 and r[3] > 0]
    if not regions:
        return bytes(pixels)
    out = arr.copy()
    value = fill_value(fill, g)
    if g.samples == 3 and g.photometric.startswith("YBR"):
        # chroma goes neutral
        values = [value, 1 << (g.bits_allocated - 1), 1 << (g.bits_allocated - 1)]
    else:
        values = [value] * g.samples
    for x, y, w, h in regions:
        x0, y0 = max(0, x), max(0, y)
        x1, y1 = min(g.cols, x + w), min(g.rows, y + h)
        if x1 <= x0 or y1 <= y0:
            continue
        for s in range(g.samples):
            out[:, s, y0:y1, x0:x1] = values[s]
    if g.planar:
        flat = out
    else:
        flat = out.transpose(0, 2, 3, 1)
    data = np.ascontiguousarray(flat).tobytes()
    return data + bytes(pixels[g.expected_bytes:])
