"""Part 10 writer; the inverse of :mod:`parser`."""

from __future__ import annotations

import struct

from . import syntax
from .dataset import DataSet, Element, FileObject
from .errors import UnsupportedTransferSyntax, ValueTooLong
from .parser import UNDEFINED, swap_bytes
from .tag import ITEM, ITEM_DELIMITER, SEQUENCE_DELIMITER, Tag
from .vr import SWAP_SIZE, VR_SPECS

GROUP_LENGTH = Tag(0x0002, 0x0000)


class _Writer:
    def __init__(self, explicit: bool, little: bool):
        self.explicit = explicit
        self.little = little
        self.e = "<" if little else ">"

    def dataset(self, ds: DataSet) -> bytes:
        return b"".join(self.element(el) for el in ds)

    def _header(self, tag: Tag, vr: str, length: int) -> bytes:
        e = self.e
        if not self.explicit:
            if length > UNDEFINED:
                raise ValueTooLong(f"{tag}: {length} bytes")
            return struct.pack(e + "HHL", tag.group, tag.element, length)
        if VR_SPECS[vr].long_length:
            if length > UNDEFINED:
                raise ValueTooLong(f"{tag}: {length} bytes")
            return struct.pack(e + "HH", tag.group, tag.element) + vr.encode() + b"\0\0" + struct.pack(e + "L", length)
        if length > 0xFFFF:
            raise ValueTooLong(f"{tag} ({vr}): {length} bytes exceeds 16-bit length field")
        return struct.pack(e + "HH", tag.group, tag.element) + vr.encode() + struct.pack(e + "H", length)

    def _item_header(self, tag: Tag, length: int) -> bytes:
        return struct.pack(self.e + "HHL", tag.group, tag.element, length)

    def items(self, items: list[DataSet]) -> bytes:
        parts = []
        for item in items:
            body = self.dataset(item)
            if item.undefined_length:
                parts.append(self._item_header(ITEM, UNDEFINED) + body + self._item_header(ITEM_DELIMITER, 0))
            else:
                parts.append(self._item_header(ITEM, len(body)) + body)
        return b"".join(parts)

    def element(self, el: Element) -> bytes:
        tag, vr = el.tag, el.vr
        if el.is_sequence:
            sub = _Writer(False, True) if el.implicit_items else self
            body = sub.items(el.items)
            if el.undefined_length:
                return self._header(tag, vr, UNDEFINED) + body + sub._item_header(SEQUENCE_DELIMITER, 0)
            return self._header(tag, vr, len(body)) + body
        if el.is_encapsulated:
            parts = []
            for frag in el.value:
                if len(frag) % 2:
                    frag = frag + b"\0"
                parts.append(self._item_header(ITEM, len(frag)) + frag)
            return self._header(tag, vr, UNDEFINED) + b"".join(parts) + self._item_header(SEQUENCE_DELIMITER, 0)
        raw = el.raw
        if len(raw) % 2:
            raw += VR_SPECS[vr].pad
        if not self.little and vr in SWAP_SIZE:
            raw = swap_bytes(raw, SWAP_SIZE[vr])
        return self._header(tag, vr, len(raw)) + raw


def encode_dataset(ds: DataSet, transfer_syntax: str) -> bytes:
    enc = syntax.encoding(transfer_syntax)
    if enc is None:
        raise UnsupportedTransferSyntax(transfer_syntax)
    return _Writer(enc.explicit_vr, enc.little_endian).dataset(ds)


def encode_meta(meta: DataSet) -> bytes:
    w = _Writer(True, True)
    rest = b"".join(w.element(el) for el in meta if el.tag != GROUP_LENGTH)
    if GROUP_LENGTH in meta:
        gl = Element(GROUP_LENGTH, "UL", struct.pack("<L", len(rest)))
        return w.element(gl) + rest
    return rest


def serialize(fo: FileObject) -> bytes:
    body = encode_dataset(fo.body, fo.transfer_syntax)
    if fo.preamble is None:
        return body
    return bytes(fo.preamble) + fo.magic + encode_meta(fo.meta) + body
