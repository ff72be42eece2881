"""Heuristic identifier detection in free text, and redaction."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple

from .dicom.dataset import DataSet
from .dicom.tag import Tag
from .dicom.walk import iter_elements

REDACTION_MARKER = "[REDACTED]"

NAME, ID, DATE, PHONE, EMAIL, SSN_LIKE, CUSTOM = "NAME", "ID", "DATE", "PHONE", "EMAIL", "SSN_LIKE", "CUSTOM"


class Finding(NamedTuple):
    start: int
    end: int
    kind: str
    matched: str

    @property
    def span(self) -> tuple[int, int]:
        return self.start, self.end


class _Drop:
    def __repr__(self) -> str:
        return "DROP"


DROP = _Drop()


def _clean(s: str) -> str:
    return " ".join(s.split())


def name_permutations(pn: str) -> set[str]:
    """Plain-text renderings of a caret-delimited person name."""
    out: set[str] = set()
    for group in pn.split("="):
        group = group.strip().rstrip("^")
        if not group:
            continue
        comps = [_clean(c) for c in group.split("^")] + [""] * 5
        family, given, middle, prefix, suffix = comps[:5]
        named = [c for c in (family, given, middle) if c]
        if len(named) == 1:
            out.add(named[0])
            continue
        out.add(group)
        if family and given:
            out.add(f"{given} {family}")
            out.add(f"{family}, {given}")
            out.add(f"{family} {given}")
            out.add(f"{given[0]} {family}")
            out.add(f"{given[0]}. {family}")
            out.add(f"{family}, {given[0]}")
            if middle:
                out.add(f"{given} {middle} {family}")
                out.add(f"{family}, {given} {middle}")
                out.add(f"{given} {middle[0]} {family}")
                out.add(f"{given} {middle[0]}. {family}")
            if prefix:
                out.add(f"{prefix} {family}")
                out.add(f"{prefix} {given} {family}")
            if suffix:
                out.add(f"{given} {family} {suffix}")
        elif middle:
            out.update(c for c in (family, given, middle) if c)
    return out


# identifier fields whose values feed the index
_ID_TAGS = (
    Tag(0x0010, 0x0020),  # PatientID
    Tag(0x0010, 0x1000),  # OtherPatientIDs
    Tag(0x0008, 0x0050),  # AccessionNumber
    Tag(0x0020, 0x0010),  # StudyID
    Tag(0x0038, 0x0010),  # AdmissionID
    Tag(0x0040, 0x2016),  # PlacerOrderNumber
    Tag(0x0040, 0x2017),  # FillerOrderNumber
    Tag(0x0012, 0x0040),  # ClinicalTrialSubjectID
    Tag(0x0010, 0x1090),  # MedicalRecordLocator
)


@dataclass(frozen=True)
class IdentifierIndex:
    person_names: frozenset = frozenset()
    ids: frozenset = frozenset()
    min_token_len: int = 3
    _terms: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        terms = []
        for kind, src in ((ID, self.ids), (NAME, self.person_names)):
            for t in src:
                t = t.strip()
                if len(t) >= self.min_token_len:
                    terms.append((t.lower(), kind))
        # longest first so merged spans prefer the fuller match
        terms.sort(key=lambda tk: (-len(tk[0]), tk[0]))
        object.__setattr__(self, "_terms", tuple(terms))

    @property
    def terms(self) -> tuple:
        return self._terms

    def __contains__(self, text: str) -> bool:
        return any(t == text.lower() for t, _ in self._terms)

    def tokens(self) -> set[str]:
        return {t for t, _ in self._terms}

    @classmethod
    def build(cls, ds: DataSet, min_token_len: int = 3, extra_ids=()) -> "IdentifierIndex":
        """Collect names and identifiers from the original (pre-replacement) dataset."""
        names: set[str] = set()
        ids: set[str] = set(extra_ids)
        for _, el in iter_elements(ds):
            if el.is_sequence or el.is_encapsulated:
                continue
            if el.vr == "PN":
                for value in el.values:
                    if not value.strip():
                        continue
                    names |= name_permutations(value)
                    for group in value.split("="):
                        for comp in group.split("^"):
                            comp = _clean(comp)
                            if len(comp) >= min_token_len:
                                names.add(comp)
            elif el.tag in _ID_TAGS:
                ids.update(v.strip() for v in el.values if v.strip())
        return cls(frozenset(names), frozenset(ids), min_token_len)


_MONTHS = "jan|feb|mar|apr|may|jun|jul|aug|sep|oct|nov|dec"
_PATTERNS = [
    (DATE, re.compile(r"(?<!\d)(?:19|20)\d\d(?:0[1-9]|1[0-2])(?:0[1-9]|[12]\d|3[01])(?!\d)")),
    (DATE, re.compile(r"(?<!\d)\d{4}-(?:0[1-9]|1[0-2])-(?:0[1-9]|[12]\d|3[01])(?!\d)")),
    (DATE, re.compile(r"(?<!\d)(?:0?[1-9]|1[0-2])/(?:0?[1-9]|[12]\d|3[01])/\d{4}(?!\d)")),
    (DATE, re.compile(rf"(?<!\d)(?:0?[1-9]|[12]\d|3[01])-(?:{_MONTHS})[a-z]*-\d{{4}}(?!\d)", re.I)),
    (EMAIL, re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}")),
    (SSN_LIKE, re.compile(r"(?<!\d)(?:\d{3}-\d{2}-\d{4}|\d{9})(?!\d)")),
    (PHONE, re.compile(r"(?<![\d-])(?:\+?1[ .-]?)?(?:\(\d{3}\)\s?|\d{3}[ .-])\d{3}[ .-]\d{4}(?![\d-])")),
]


def _merge(findings: list[Finding], text: str) -> list[Finding]:
    findings.sort(key=lambda f: (f.start, -f.end))
    merged: list[Finding] = []
    for f in findings:
        if merged and f.start < merged[-1].end:
            last = merged[-1]
            end = max(last.end, f.end)
            merged[-1] = Finding(last.start, end, last.kind, text[last.start:end])
        else:
            merged.append(f)
    return merged


def _allowed_spans(text: str, allowlist) -> list[tuple[int, int]]:
    spans = []
    for phrase in allowlist:
        if not phrase:
            continue
        start = text.find(phrase)
        while start != -1:
            spans.append((start, start + len(phrase)))
            start = text.find(phrase, start + 1)
    return spans


def scan_text(value: str, index: IdentifierIndex | None = None, allowlist=frozenset()) -> list[Finding]:
    """Index echoes and pattern hits, merged, with allowlisted phrases exempted.

    A finding is suppressed only when it lies entirely inside an occurrence of
    an allowlisted phrase; anything reaching past the phrase is still reported.
    """
    found: list[Finding] = []
    lower = value.lower()
    if index is not None:
        for term, kind in index.terms:
            start = lower.find(term)
            while start != -1:
                found.append(Finding(start, start + len(term), kind, value[start:start + len(term)]))
                start = lower.find(term, start + 1)
    for kind, rx in _PATTERNS:
        for m in rx.finditer(value):
            found.append(Finding(m.start(), m.end(), kind, m.group()))
    if found:
        # text already redacted never yields a new finding
        spans = _allowed_spans(value, set(allowlist) | {REDACTION_MARKER})
        found = [f for f in found if not any(a <= f.start and f.end <= b for a, b in spans)]
    return _merge(found, value)


def clean_text(value: str, findings: list[Finding], mode: str = "REDACT_TOKEN"):
    """Redact finding spans, or return ``DROP`` when any finding exists in DROP_VALUE mode."""
    if not findings:
        return value
    if mode == "DROP_VALUE":
        return DROP
    out = value
    for f in sorted(findings, key=lambda f: f.start, reverse=True):
        out = out[:f.start] + REDACTION_MARKER + out[f.end:]
    return out
