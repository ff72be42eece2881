"""Safe private element registry, keyed by private creator rather than raw tag."""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple

from ..dicom.tag import Tag
from ..dicom.vr import VR_SPECS
from .errors import RuleError


class SafeEntry(NamedTuple):
    creator: str
    group: int
    element_low: int
    vr: str


class SafePrivateList:
    """Private elements vetted as free of identifying content.

    An element ``(gggg,BBee)`` is looked up through the creator string found
    in ``(gggg,00BB)``, so a block reserved at 0x10 in one file and at 0x43 in
    another resolves to the same entry.
    """

    def __init__(self, entries: Iterable[SafeEntry] = ()):
        self._entries = {(e.creator, e.group, e.element_low): e for e in entries}

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries.values())

    def lookup(self, creator: str | None, tag: Tag, vr: str) -> SafeEntry | None:
        if not creator or tag.private_block is None:
            return None
        entry = self._entries.get((creator.strip(), tag.group, tag.element & 0xFF))
        if entry is None:
            return None
        if vr != entry.vr and vr != "UN":
            return None
        return entry


def parse_safe_private(text: str) -> SafePrivateList:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        fields = raw.split("\t")
        if len(fields) < 4:
            raise RuleError(f"safe private line {lineno}: expected creator, group, element, VR")
        creator, group, low, vr = (f.strip() for f in fields[:4])
        if vr not in VR_SPECS:
            raise RuleError(f"safe private line {lineno}: unknown VR {vr}")
        g, e = int(group, 16), int(low, 16)
        if g % 2 == 0 or not 0 <= e <= 0xFF:
            raise RuleError(f"safe private line {lineno}: not a private group/element byte")
        entries.append(SafeEntry(creator, g, e, vr))
    return SafePrivateList(entries)


def load_safe_private(source: str | Path | None = None) -> SafePrivateList:
    if source is None:
        text = resources.files("deident.rules").joinpath("data/safe_private.tsv").read_text()
    else:
        text = Path(source).read_text()
    return parse_safe_private(text)
