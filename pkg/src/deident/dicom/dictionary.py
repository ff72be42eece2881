"""Data dictionary loaded from the checked-in ``data/dictionary.tsv``.

Updating the dictionary is a data change only: add a row
``tag<TAB>VR<TAB>keyword``; masked tags such as ``60xx,3000`` cover
repeating groups.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from typing import NamedTuple

from .tag import Tag, TagPattern
from .vr import VR_SPECS


class Entry(NamedTuple):
    tag: str
    vr: str
    keyword: str


def parse_dictionary(text: str) -> tuple[dict[Tag, Entry], list[tuple[TagPattern, Entry]]]:
    exact: dict[Tag, Entry] = {}
    masked: list[tuple[TagPattern, Entry]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ValueError(f"dictionary line {lineno}: expected 3 fields, got {len(fields)}")
        tag_text, vr, keyword = (f.strip() for f in fields)
        if vr not in VR_SPECS:
            raise ValueError(f"dictionary line {lineno}: unknown VR {vr}")
        pattern = TagPattern(tag_text)
        entry = Entry(pattern.text, vr, keyword)
        if pattern.is_exact:
            exact[pattern.tag()] = entry
        else:
            masked.append((pattern, entry))
    masked.sort(key=lambda pe: -pe[0].specificity)
    return exact, masked


@lru_cache(maxsize=1)
def _tables():
    text = resources.files("deident.dicom").joinpath("data/dictionary.tsv").read_text()
    exact, masked = parse_dictionary(text)
    by_keyword = {e.keyword: t for t, e in exact.items()}
    return exact, masked, by_keyword


def lookup(tag: Tag) -> Entry | None:
    exact, masked, _ = _tables()
    entry = exact.get(tag)
    if entry is not None:
        return entry
    if not tag.is_private:
        for pattern, e in masked:
            if pattern.matches(tag):
                return e
    return None


def implicit_vr(tag: Tag) -> str:
    """VR to assume for an element read without an explicit VR."""
    if tag.element == 0x0000:
        return "UL"
    if tag.is_private_creator:
        return "LO"
    entry = lookup(tag)
    return entry.vr if entry else "UN"


def keyword(tag: Tag) -> str:
    entry = lookup(tag)
    return entry.keyword if entry else ""


def tag_for(keyword_: str) -> Tag:
    _, _, by_keyword = _tables()
    try:
        return by_keyword[keyword_]
    except KeyError:
        raise KeyError(f"no dictionary entry for keyword {keyword_!r}") from None
