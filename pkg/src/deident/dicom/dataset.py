"""In-memory model: Element, DataSet, Fragments, FileObject.

Non-sequence values are held as the raw encoded bytes (little-endian for
binary VRs, whatever the source byte order was), so an unmodified element
serializes back to exactly the bytes it was read from. Text is decoded as
latin-1, which maps bytes one-to-one and never transcodes.
"""

from __future__ import annotations

import copy
import struct
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

from . import dictionary
from .tag import Tag
from .vr import spec


class Fragments(list):
    """Encapsulated pixel data: ``[basic_offset_table, fragment, ...]``."""


Value = Union[bytes, "list[DataSet]", Fragments]


@dataclass
class Element:
    tag: Tag
    vr: str
    value: Value = b""
    undefined_length: bool = False
    # UN with undefined length: items are implicit-VR little-endian.
    implicit_items: bool = False

    @property
    def keyword(self) -> str:
        return dictionary.keyword(self.tag)

    @property
    def is_sequence(self) -> bool:
        return isinstance(self.value, list) and not isinstance(self.value, Fragments)

    @property
    def is_encapsulated(self) -> bool:
        return isinstance(self.value, Fragments)

    @property
    def items(self) -> "list[DataSet]":
        if not self.is_sequence:
            raise TypeError(f"{self.tag} is not a sequence")
        return self.value  # type: ignore[return-value]

    @property
    def raw(self) -> bytes:
        if not isinstance(self.value, (bytes, bytearray)):
            raise TypeError(f"{self.tag} has no flat byte value")
        return bytes(self.value)

    @property
    def str_value(self) -> str:
        """Decoded text with trailing padding removed."""
        return self.raw.decode("latin-1").rstrip(" \x00")

    @property
    def values(self) -> list[str]:
        text = self.str_value
        if text == "":
            return []
        if spec(self.vr).multi_valued:
            return text.split("\\")
        return [text]

    @property
    def numbers(self) -> tuple:
        s = spec(self.vr)
        if s.kind != "binary":
            raise TypeError(f"{self.vr} is not a binary numeric VR")
        data = self.raw
        n = len(data) // s.item_size
        if self.vr == "AT":
            return struct.unpack(f"<{2 * n}H", data[: n * 4])
        return struct.unpack(f"<{n}{s.struct_code}", data[: n * s.item_size])

    @property
    def is_empty(self) -> bool:
        if self.is_sequence or self.is_encapsulated:
            return len(self.value) == 0
        return len(self.value) == 0

    def copy(self) -> "Element":
        return copy.deepcopy(self)


def encode_text(vr: str, value: str | Iterable[str]) -> bytes:
    if not isinstance(value, str):
        value = "\\".join(value)
    data = value.encode("latin-1")
    if len(data) % 2:
        data += spec(vr).pad
    return data


def text_element(tag: Tag | tuple, vr: str, value: str | Iterable[str]) -> Element:
    return Element(Tag(*tag), vr, encode_text(vr, value))


def numeric_element(tag: Tag | tuple, vr: str, numbers: Iterable) -> Element:
    s = spec(vr)
    nums = list(numbers)
    if vr == "AT":
        data = struct.pack(f"<{len(nums)}H", *nums)
    else:
        data = struct.pack(f"<{len(nums)}{s.struct_code}", *nums)
    return Element(Tag(*tag), vr, data)


def sequence_element(tag: Tag | tuple, items: Iterable["DataSet"]) -> Element:
    return Element(Tag(*tag), "SQ", list(items))


def _as_tag(key) -> Tag:
    if isinstance(key, Tag):
        return key
    if isinstance(key, str):
        return dictionary.tag_for(key)
    return Tag(*key)


class DataSet:
    """Tag-ordered collection of elements; also used for sequence items.

    Keys may be a Tag, a ``(group, element)`` tuple or a dictionary keyword.
    """

    __slots__ = ("_elements", "undefined_length")

    def __init__(self, elements: Iterable[Element] = (), undefined_length: bool = False):
        self._elements: dict[Tag, Element] = {}
        self.undefined_length = undefined_length
        for el in elements:
            self.add(el)

    @classmethod
    def _from_parsed(cls, elements: dict[Tag, Element], undefined_length: bool) -> "DataSet":
        ds = cls(undefined_length=undefined_length)
        ds._elements = elements
        return ds

    def add(self, element: Element) -> None:
        self[element.tag] = element

    def __setitem__(self, key, element: Element) -> None:
        tag = _as_tag(key)
        if tag != element.tag:
            raise ValueError(f"key {tag} does not match element tag {element.tag}")
        els = self._elements
        if tag in els or not els or tag > next(reversed(els)):
            els[tag] = element
        else:
            els[tag] = element
            self._elements = dict(sorted(els.items()))

    def __getitem__(self, key) -> Element:
        return self._elements[_as_tag(key)]

    def __delitem__(self, key) -> None:
        del self._elements[_as_tag(key)]

    def __contains__(self, key) -> bool:
        return _as_tag(key) in self._elements

    def __iter__(self) -> Iterator[Element]:
        return iter(list(self._elements.values()))

    def __len__(self) -> int:
        return len(self._elements)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DataSet):
            return NotImplemented
        return list(self._elements.items()) == list(other._elements.items())

    def __repr__(self) -> str:
        return f"DataSet({len(self)} elements)"

    def get(self, key, default=None) -> Element | None:
        return self._elements.get(_as_tag(key), default)

    def pop(self, key, default=None) -> Element | None:
        return self._elements.pop(_as_tag(key), default)

    def tags(self) -> list[Tag]:
        return list(self._elements)

    def text(self, key, default: str = "") -> str:
        el = self.get(key)
        if el is None or not isinstance(el.value, (bytes, bytearray)):
            return default
        return el.str_value

    def set_text(self, key, vr: str, value: str | Iterable[str]) -> None:
        tag = _as_tag(key)
        self[tag] = text_element(tag, vr, value)

    def number(self, key, default=None):
        el = self.get(key)
        if el is None or el.is_empty:
            return default
        if spec(el.vr).kind == "binary":
            return el.numbers[0]
        vals = el.values
        if not vals:
            return default
        try:
            return int(vals[0]) if el.vr == "IS" else float(vals[0])
        except ValueError:
            return default

    def copy(self) -> "DataSet":
        return copy.deepcopy(self)

    def is_sorted(self) -> bool:
        tags = list(self._elements)
        return all(a < b for a, b in zip(tags, tags[1:]))


@dataclass
class FileObject:
    """A Part 10 file; ``preamble`` is None for a raw dataset without header."""

    preamble: bytes | None
    meta: DataSet
    body: DataSet
    transfer_syntax: str
    magic: bytes = b"DICM"
    extra: dict = field(default_factory=dict)

    def copy(self) -> "FileObject":
        return copy.deepcopy(self)
