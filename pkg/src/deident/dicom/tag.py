"""Data element tags and masked tag patterns."""

from __future__ import annotations

import re
from typing import NamedTuple


class Tag(NamedTuple):
    """A (group, element) pair; tuple ordering gives the DICOM tag order."""

    group: int
    element: int

    @classmethod
    def parse(cls, text: str) -> "Tag":
        """Parse ``"0010,0010"``, ``"(0010,0010)"`` or ``"00100010"``."""
        s = text.strip().strip("()").replace(" ", "")
        if "," in s:
            g, e = s.split(",", 1)
        elif len(s) == 8:
            g, e = s[:4], s[4:]
        else:
            raise ValueError(f"bad tag {text!r}")
        return cls(int(g, 16), int(e, 16))

    @property
    def is_private(self) -> bool:
        return self.group % 2 == 1

    @property
    def is_private_creator(self) -> bool:
        return self.is_private and 0x0010 <= self.element <= 0x00FF

    @property
    def private_block(self) -> int | None:
        """Block byte (0x10-0xFF) for a private data element, else None."""
        if self.is_private and self.element >= 0x1000:
            return self.element >> 8
        return None

    @property
    def is_group_length(self) -> bool:
        return self.element == 0x0000

    def __str__(self) -> str:
        return f"({self.group:04X},{self.element:04X})"

    def __repr__(self) -> str:
        return f"Tag(0x{self.group:04X}, 0x{self.element:04X})"


ITEM = Tag(0xFFFE, 0xE000)
ITEM_DELIMITER = Tag(0xFFFE, 0xE00D)
SEQUENCE_DELIMITER = Tag(0xFFFE, 0xE0DD)

_PATTERN_RE = re.compile(r"^\(?([0-9A-Fa-fxX]{4}),([0-9A-Fa-fxX]{4})\)?$")


class TagPattern:
    """A tag with 'x' nibble wildcards, such as ``60xx,3000``.

    ``specificity`` is the number of fixed nibbles; an exact tag has 8.
    """

    __slots__ = ("text", "_value", "_mask", "specificity")

    def __init__(self, text: str):
        m = _PATTERN_RE.match(text.strip())
        if not m:
            raise ValueError(f"malformed tag pattern {text!r}")
        digits = (m.group(1) + m.group(2)).upper()
        value = mask = 0
        for ch in digits:
            value <<= 4
            mask <<= 4
            if ch != "X":
                value |= int(ch, 16)
                mask |= 0xF
        self.text = f"{digits[:4]},{digits[4:]}"
        self._value = value
        self._mask = mask
        self.specificity = sum(ch != "X" for ch in digits)

    @property
    def is_exact(self) -> bool:
        return self.specificity == 8

    def tag(self) -> Tag:
        if not self.is_exact:
            raise ValueError(f"{self.text} is a masked pattern")
        return Tag(self._value >> 16, self._value & 0xFFFF)

    def matches(self, tag: Tag) -> bool:
        return ((tag.group << 16) | tag.element) & self._mask == self._value

    def __eq__(self, other) -> bool:
        return isinstance(other, TagPattern) and other.text == self.text

    def __hash__(self) -> int:
        return hash(self.text)

    def __repr__(self) -> str:
        return f"TagPattern({self.text!r})"
