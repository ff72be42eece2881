"""Part 10 reader.

Handles implicit/explicit little-endian, explicit big-endian (values are
normalised to little-endian in memory), nested sequences of defined and
undefined length, and encapsulated pixel data fragments.
"""

from __future__ import annotations

import struct

from . import dictionary, syntax
from .dataset import DataSet, Element, FileObject, Fragments
from .errors import BadMagic, MalformedDataset, TruncatedStream, UnsupportedTransferSyntax
from .tag import ITEM, ITEM_DELIMITER, SEQUENCE_DELIMITER, Tag
from .vr import SWAP_SIZE, VR_SPECS

UNDEFINED = 0xFFFFFFFF
PIXEL_DATA = Tag(0x7FE0, 0x0010)
_VR_CODES = {code.encode("ascii"): code for code in VR_SPECS}


def swap_bytes(data: bytes, size: int) -> bytes:
    if size <= 1 or not data:
        return data
    n = len(data) - len(data) % size
    chunks = [data[i:i + size][::-1] for i in range(0, n, size)]
    return b"".join(chunks) + data[n:]


class _Reader:
    def __init__(self, data: bytes, explicit: bool, little: bool):
        self.data = data
        self.explicit = explicit
        self.little = little
        self.e = "<" if little else ">"

    def need(self, pos: int, n: int) -> None:
        if pos + n > len(self.data):
            raise TruncatedStream(f"stream ends at {len(self.data)}, needed {pos + n}")

    def tag_at(self, pos: int) -> Tag:
        self.need(pos, 4)
        g, e = struct.unpack_from(self.e + "HH", self.data, pos)
        return Tag(g, e)

    def dataset(self, pos: int, end: int | None, stop_group: int | None = None) -> tuple[DataSet, int]:
        """Read elements from ``pos``; ``end`` None means an undefined-length item."""
        elements: dict[Tag, Element] = {}
        data = self.data
        while True:
            if end is not None and pos >= end:
                if pos > end:
                    raise MalformedDataset("element overruns enclosing item")
                break
            if end is None and pos >= len(data):
                raise TruncatedStream("missing item delimiter")
            tag = self.tag_at(pos)
            if stop_group is not None and tag.group != stop_group:
                break
            if tag == ITEM_DELIMITER:
                if end is not None:
                    raise MalformedDataset(f"item delimiter inside defined-length item at {pos}")
                self.need(pos, 8)
                return DataSet._from_parsed(elements, True), pos + 8
            if tag.group == 0xFFFE:
                raise MalformedDataset(f"unexpected {tag} at {pos}")
            el, pos = self.element(tag, pos)
            elements[tag] = el
        return DataSet._from_parsed(elements, False), pos

    def element(self, tag: Tag, pos: int) -> tuple[Element, int]:
        data, e = self.data, self.e
        if self.explicit:
            self.need(pos, 8)
            vr = _VR_CODES.get(data[pos + 4:pos + 6])
            if vr is None:
                raise MalformedDataset(f"invalid VR {data[pos + 4:pos + 6]!r} for {tag}")
            if VR_SPECS[vr].long_length:
                self.need(pos, 12)
                length = struct.unpack_from(e + "L", data, pos + 8)[0]
                pos += 12
            else:
                length = struct.unpack_from(e + "H", data, pos + 6)[0]
                pos += 8
        else:
            self.need(pos, 8)
            vr = dictionary.implicit_vr(tag)
            length = struct.unpack_from(e + "L", data, pos + 4)[0]
            pos += 8

        if length == UNDEFINED:
            if vr == "SQ":
                items, pos = self.items(pos, None)
                return Element(tag, "SQ", items, undefined_length=True), pos
            if vr == "UN":
                sub = _Reader(data, False, True)
                items, pos = sub.items(pos, None)
                return Element(tag, "UN", items, undefined_length=True, implicit_items=True), pos
            if vr in ("OB", "OW") or tag == PIXEL_DATA:
                frags, pos = self.fragments(pos)
                return Element(tag, vr, frags, undefined_length=True), pos
            raise MalformedDataset(f"undefined length on {vr} element {tag}")

        self.need(pos, length)
        if vr == "SQ":
            items, end = self.items(pos, pos + length)
            return Element(tag, "SQ", items), end
        raw = data[pos:pos + length]
        if not self.little and vr in SWAP_SIZE:
            raw = swap_bytes(raw, SWAP_SIZE[vr])
        return Element(tag, vr, raw), pos + length

    def items(self, pos: int, end: int | None) -> tuple[list[DataSet], int]:
        out: list[DataSet] = []
        while True:
            if end is not None and pos >= end:
                if pos > end:
                    raise MalformedDataset("item overruns sequence")
                return out, pos
            tag = self.tag_at(pos)
            self.need(pos, 8)
            length = struct.unpack_from(self.e + "L", self.data, pos + 4)[0]
            if tag == SEQUENCE_DELIMITER:
                if end is not None:
                    raise MalformedDataset("sequence delimiter in defined-length sequence")
                return out, pos + 8
            if tag != ITEM:
                raise MalformedDataset(f"expected item tag, found {tag} at {pos}")
            pos += 8
            if length == UNDEFINED:
                ds, pos = self.dataset(pos, None)
            else:
                self.need(pos, length)
                ds, _ = self.dataset(pos, pos + length)
                pos += length
            out.append(ds)

    def fragments(self, pos: int) -> tuple[Fragments, int]:
        frags = Fragments()
        while True:
            tag = self.tag_at(pos)
            self.need(pos, 8)
            length = struct.unpack_from(self.e + "L", self.data, pos + 4)[0]
            pos += 8
            if tag == SEQUENCE_DELIMITER:
                return frags, pos
            if tag != ITEM or length == UNDEFINED:
                raise MalformedDataset(f"bad fragment item {tag} at {pos - 8}")
            self.need(pos, length)
            frags.append(self.data[pos:pos + length])
            pos += length


def _looks_explicit(data: bytes) -> bool:
    return len(data) >= 6 and data[4:6] in _VR_CODES


def parse_file(data: bytes, allow_raw: bool = False) -> FileObject:
    """Parse a Part 10 stream, or a bare dataset when ``allow_raw`` is set."""
    data = bytes(data)
    if len(data) >= 132 and data[128:132] == b"DICM":
        preamble = data[:128]
        meta, pos = _Reader(data, True, True).dataset(132, len(data), stop_group=0x0002)
        ts = meta.text((0x0002, 0x0010))
        if not ts:
            raise UnsupportedTransferSyntax("file meta has no transfer syntax")
    elif not allow_raw:
        if len(data) < 132:
            raise TruncatedStream("stream shorter than preamble and magic")
        raise BadMagic("no DICM prefix")
    else:
        preamble = None
        meta = DataSet()
        pos = 0
        ts = syntax.EXPLICIT_LE if _looks_explicit(data) else syntax.IMPLICIT_LE

    enc = syntax.encoding(ts)
    if enc is None:
        raise UnsupportedTransferSyntax(ts)
    body, _ = _Reader(data, enc.explicit_vr, enc.little_endian).dataset(pos, len(data))
    if any(t.group == 0x0002 for t in body.tags()):
        raise MalformedDataset("group 0002 element in main dataset")
    return FileObject(preamble=preamble, meta=meta, body=body, transfer_syntax=ts)
