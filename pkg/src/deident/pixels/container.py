"""File-level pixel hygiene: preamble, trailing padding, frame metadata and regions."""

from __future__ import annotations

import io
import struct

import numpy as np

from ..dicom import syntax
from ..dicom.dataset import DataSet, Element, FileObject, Fragments
from ..dicom.tag import Tag
from .jpeg import MalformedJpeg, scrub_jpeg_bytes
from .jpegcodec import UnsupportedJpegMode, block_redact_jpeg
from .redact import Geometry, GeometryMismatch, redact_uncompressed

PIXEL_DATA = Tag(0x7FE0, 0x0010)
TRAILING_PADDING = Tag(0xFFFC, 0xFFFC)


class UnsupportedPixelEncoding(ValueError):
    pass


def geometry_of(ds: DataSet) -> Geometry:
    def num(group, element, default):
        value = ds.number(Tag(group, element))
        return default if value is None else int(value)

    return Geometry(
        rows=num(0x0028, 0x0010, 0),
        cols=num(0x0028, 0x0011, 0),
        samples=num(0x0028, 0x0002, 1),
        bits_allocated=num(0x0028, 0x0100, 8),
        planar=num(0x0028, 0x0006, 0),
        frames=max(1, num(0x0028, 0x0008, 1)),
        photometric=ds.text(Tag(0x0028, 0x0004)) or "MONOCHROME2",
        pixel_representation=num(0x0028, 0x0103, 0),
    )


def frames_of(fragments: Fragments, n_frames: int) -> list[bytes]:
    """Group encapsulated fragments into frames."""
    bot, frags = fragments[0], list(fragments[1:])
    if not frags:
        return []
    if bot:
        offsets = list(struct.unpack(f"<{len(bot) // 4}I", bot[:len(bot) // 4 * 4]))
        starts, pos = {}, 0
        for k, frag in enumerate(frags):
            starts[pos] = k
            pos += 8 + len(frag)
        if all(o in starts for o in offsets):
            idx = [starts[o] for o in offsets] + [len(frags)]
            return [b"".join(frags[a:b]) for a, b in zip(idx, idx[1:])]
    if n_frames == len(frags):
        return frags
    if n_frames == 1:
        return [b"".join(frags)]
    out: list[bytes] = []
    for frag in frags:
        if frag[:2] == b"\xff\xd8" or not out:
            out.append(frag)
        else:
            out[-1] += frag
    return out


def build_fragments(frames: list[bytes], with_offsets: bool) -> Fragments:
    """One fragment per frame (even-padded) with a rebuilt offset table."""
    frags = [f + b"\x00" if len(f) % 2 else f for f in frames]
    offsets, pos = [], 0
    for f in frags:
        offsets.append(pos)
        pos += 8 + len(f)
    bot = struct.pack(f"<{len(offsets)}I", *offsets) if with_offsets else b""
    return Fragments([bot] + frags)


def _map_frames(file: FileObject, fn) -> FileObject:
    el = file.body.get(PIXEL_DATA)
    if el is None or not el.is_encapsulated:
        return file
    frames = frames_of(el.value, geometry_of(file.body).frames)
    new_frames = [fn(f) for f in frames]
    if new_frames == frames:
        return file
    frags = build_fragments(new_frames, bool(el.value[0]) or len(frames) > 1)
    file.body[PIXEL_DATA] = Element(PIXEL_DATA, el.vr, frags, undefined_length=True)
    return file


def sanitize_container(file: FileObject) -> FileObject:
    """Zero the preamble, drop trailing padding and strip JPEG metadata segments."""
    out = file.copy()
    if out.preamble is not None:
        out.preamble = b"\x00" * 128
    out.body.pop(TRAILING_PADDING)
    if out.transfer_syntax in syntax.JPEG_FAMILY:
        out = _map_frames(out, scrub_jpeg_bytes)
    return out


def _pillow_redact(frame: bytes, regions, fill: str, geometry: Geometry) -> bytes:
    """Decode, paint, re-encode: the lossy fallback for non-baseline JPEG."""
    from PIL import Image

    try:
        img = Image.open(io.BytesIO(frame))
        img.load()
    except Exception as exc:  # Pillow raises several unrelated types
        raise UnsupportedPixelEncoding(f"cannot decode frame: {exc}") from None
    arr = np.array(img)
    level = 0 if fill == "BLACK" else 128
    if fill == "BLACK" and geometry.photometric == "MONOCHROME1":
        level = 255
    for x, y, w, h in regions:
        arr[max(0, y):y + h, max(0, x):x + w] = level
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, "JPEG", quality=95)
    return buf.getvalue()


def redact_pixels(file: FileObject, regions, fill: str = "BLACK") -> tuple[FileObject, str]:
    """Apply ``regions`` to every frame; returns the file and an audit note."""
    out = file.copy()
    regions = list(regions)
    if not regions:
        return out, ""
    el = out.body.get(PIXEL_DATA)
    if el is None:
        return out, "no pixel data"
    geometry = geometry_of(out.body)
    ts = out.transfer_syntax
    if not el.is_encapsulated:
        if geometry.bits_allocated not in (8, 16, 32):
            raise UnsupportedPixelEncoding(f"{geometry.bits_allocated} bits allocated")
        data = redact_uncompressed(el.raw, geometry, regions, fill)
        out.body[PIXEL_DATA] = Element(PIXEL_DATA, el.vr, data)
        return out, f"{len(regions)} regions redacted"
    if ts not in syntax.JPEG_FAMILY:
        raise UnsupportedPixelEncoding(f"no compressed-domain redaction for {ts}")
    lossy = []
    mono1 = geometry.photometric == "MONOCHROME1"

    def redact(frame: bytes) -> bytes:
        try:
            return block_redact_jpeg(frame, regions, fill, monochrome1=mono1).encode()
        except UnsupportedJpegMode:
            lossy.append(1)
            return _pillow_redact(frame, regions, fill, geometry)

    out = _map_frames(out, redact)
    if lossy:
        return out, f"{len(lossy)} frames decompressed and re-encoded (lossy)"
    return out, f"{len(regions)} regions redacted in the coefficient domain"


__all__ = [
    "GeometryMismatch", "MalformedJpeg", "UnsupportedPixelEncoding", "build_fragments",
    "frames_of", "geometry_of", "redact_pixels", "sanitize_container",
]
