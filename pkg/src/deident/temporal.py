"""Date/time shifting with interval preservation, and age generalization."""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from importlib import resources
from pathlib import Path
from typing import Callable, NamedTuple

from .dicom.dataset import DataSet, Element, encode_text
from .dicom.tag import Tag
from .dicom.walk import REMOVE, walk
from .remap import Offset, RemapSession

DUMMY_DA = "19700101"
DUMMY_TM = "000000"
DUMMY_DT = "19700101000000"

# Type 2 stamps that must stay present when all dates are removed.
REQUIRED_STAMPS = frozenset({
    Tag(0x0008, 0x0020), Tag(0x0008, 0x0030),  # study date/time
    Tag(0x0008, 0x0023), Tag(0x0008, 0x0033),  # content date/time
    Tag(0x0010, 0x0030),                       # birth date
})


class UnparseableDate(ValueError):
    pass


class BadAgeFormat(ValueError):
    pass


@dataclass(frozen=True)
class TemporalPolicy:
    mode: str = "SHIFT"  # REMOVE_ALL | RETAIN_FULL | SHIFT
    shift_times_too: bool = False
    offset_range_days: tuple = (-3650, -1)
    age_topcode_years: int = 89
    age_bin: str = "NONE"  # NONE | DECADE

    @classmethod
    def from_config(cls, config) -> "TemporalPolicy":
        return cls(config.temporal_mode, config.shift_times_too, tuple(config.offset_range_days),
                   config.age_topcode_years, config.age_bin)


class StampPair(NamedTuple):
    date: str
    time: str | None = None


def assign_offset(patient_key: str, policy: TemporalPolicy, session: RemapSession) -> Offset:
    """Per-patient offset, drawn once and reused for the session."""
    return session.offset(patient_key, policy.offset_range_days, policy.shift_times_too)


# -- parsing ---------------------------------------------------------------

_DA_RE = re.compile(r"^(\d{4})(\d{2})(\d{2})$")
_TM_RE = re.compile(r"^(\d{2})(\d{2})?(\d{2})?(\.\d{1,6})?$")
_DT_RE = re.compile(r"^(\d{8})(\d{2}(?:\d{2}(?:\d{2}(?:\.\d{1,6})?)?)?)?([+-]\d{4})?$")


def parse_da(value: str) -> date:
    m = _DA_RE.match(value.strip())
    if not m:
        raise UnparseableDate(value)
    try:
        return date(*map(int, m.groups()))
    except ValueError:
        raise UnparseableDate(value) from None


def _parse_tm(value: str) -> tuple[int, int, int, str, int]:
    """(h, m, s, fraction text, component count)."""
    m = _TM_RE.match(value.strip())
    if not m:
        raise UnparseableDate(value)
    hh, mm, ss, frac = m.groups()
    if mm is None and (ss is not None or frac is not None):
        raise UnparseableDate(value)
    if ss is None and frac is not None:
        raise UnparseableDate(value)
    h, mi, s = int(hh), int(mm or 0), int(ss or 0)
    if h > 23 or mi > 59 or s > 60:
        raise UnparseableDate(value)
    parts = 1 + (mm is not None) + (ss is not None)
    return h, mi, min(s, 59), frac or "", parts


def _format_tm(h: int, mi: int, s: int, frac: str, parts: int) -> str:
    out = f"{h:02d}"
    if parts >= 2:
        out += f"{mi:02d}"
    if parts >= 3:
        out += f"{s:02d}" + frac
    return out


def shift_stamp(s: StampPair, offset: Offset | int) -> StampPair:
    """Shift a date (and optional time) by ``offset``.

    A day-only offset leaves the time untouched. With seconds, date and time
    move together as one instant, so intervals that cross midnight survive.
    """
    if isinstance(offset, int):
        offset = Offset(offset)
    d = parse_da(s.date)
    try:
        if s.time is None or s.time.strip() == "":
            return StampPair(_fmt_date(d + timedelta(days=offset.days)), s.time)
        h, mi, sec, frac, parts = _parse_tm(s.time)
        if offset.seconds == 0:
            return StampPair(_fmt_date(d + timedelta(days=offset.days)), s.time)
        instant = datetime(d.year, d.month, d.day, h, mi, sec) + timedelta(days=offset.days, seconds=offset.seconds)
    except OverflowError:
        raise UnparseableDate(f"{s.date} shifted out of calendar range") from None
    return StampPair(_fmt_date(instant.date()),
                     _format_tm(instant.hour, instant.minute, instant.second, frac, parts))


def _fmt_date(d: date) -> str:
    return f"{d.year:04d}{d.month:02d}{d.day:02d}"


def shift_time(value: str, offset: Offset) -> str:
    """Time without a date: rotate by the seconds part of the offset."""
    h, mi, sec, frac, parts = _parse_tm(value)
    total = (h * 3600 + mi * 60 + sec + offset.seconds) % 86400
    return _format_tm(total // 3600, total // 60 % 60, total % 60, frac, parts)


def shift_datetime(value: str, offset: Offset) -> str:
    m = _DT_RE.match(value.strip())
    if not m:
        raise UnparseableDate(value)
    date_part, time_part, tz = m.groups()
    shifted = shift_stamp(StampPair(date_part, time_part), offset)
    return shifted.date + (shifted.time or "") + (tz or "")


# -- dataset level ---------------------------------------------------------

def parse_pair_table(text: str) -> list[tuple[Tag, Tag]]:
    pairs = []
    for raw in text.splitlines():
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        fields = raw.split("\t")
        pairs.append((Tag.parse(fields[0]), Tag.parse(fields[1])))
    return pairs


def load_pair_table(source: str | Path | None = None) -> list[tuple[Tag, Tag]]:
    if source is None:
        text = resources.files("deident").joinpath("data/pairs.tsv").read_text()
    else:
        text = Path(source).read_text()
    return parse_pair_table(text)


Selector = Callable[[tuple, Element], bool]


def _dummy_for(vr: str) -> str:
    return {"DA": DUMMY_DA, "TM": DUMMY_TM, "DT": DUMMY_DT}[vr]


def shift_elements(ds: DataSet, policy: TemporalPolicy, offset: Offset | None,
                   pair_table, select: Selector | None = None) -> tuple[DataSet, dict]:
    """Shift selected DA/TM/DT elements; returns the dataset and per-path outcomes.

    Outcomes are "shifted", "kept", "dummied", "removed" or "unparseable".
    """
    outcomes: dict = {}
    if select is None:
        def select(path, el):
            return el.vr in ("DA", "TM", "DT")
    time_partner = {tm: da for da, tm in pair_table}
    date_partner = {da: tm for da, tm in pair_table}
    if offset is None:
        offset = Offset(0)

    def visit(path, el, parent: DataSet):
        if el.vr not in ("DA", "TM", "DT") or not select(path, el):
            return None
        text = el.str_value
        if policy.mode == "RETAIN_FULL":
            outcomes[path] = "kept"
            return None
        if policy.mode == "REMOVE_ALL":
            if el.tag in REQUIRED_STAMPS:
                outcomes[path] = "dummied"
                return Element(el.tag, el.vr, encode_text(el.vr, _dummy_for(el.vr)))
            outcomes[path] = "removed"
            return REMOVE
        if text == "":
            outcomes[path] = "kept"
            return None
        try:
            if el.vr == "DA":
                partner = parent.get(date_partner.get(el.tag, Tag(0xFFFF, 0xFFFF)))
                time = partner.str_value if partner is not None and partner.vr == "TM" else None
                try:
                    new = shift_stamp(StampPair(text, time or None), offset).date
                except UnparseableDate:
                    if time is None:
                        raise
                    new = shift_stamp(StampPair(text), offset).date
            elif el.vr == "TM":
                da_tag = time_partner.get(el.tag)
                partner = parent.get(da_tag) if da_tag is not None else None
                if offset.seconds == 0:
                    _parse_tm(text)
                    new = text
                elif partner is not None and partner.vr == "DA" and partner.str_value:
                    try:
                        new = shift_stamp(StampPair(partner.str_value, text), offset).time
                    except UnparseableDate:
                        new = shift_time(text, offset)
                else:
                    new = shift_time(text, offset)
            else:
                new = "\\".join(shift_datetime(v, offset) for v in text.split("\\"))
        except UnparseableDate:
            outcomes[path] = "unparseable"
            return REMOVE
        outcomes[path] = "shifted"
        if new == text:
            return None
        return Element(el.tag, el.vr, encode_text(el.vr, new))

    # walk hands the visitor only (path, element); keep the original parent
    # dataset of every level so partners are read before any edit.
    parents: dict = {}

    def index(d: DataSet, prefix: tuple):
        for e in d:
            parents[prefix + (e.tag,)] = d
            if e.is_sequence:
                for i, item in enumerate(e.items):
                    index(item, prefix + (e.tag, i))

    index(ds, ())
    out = walk(ds, lambda p, e: visit(p, e, parents[p]))
    return out, outcomes


def shift_dataset(ds: DataSet, policy: TemporalPolicy, offset: Offset | None, pair_table,
                  select: Selector | None = None) -> DataSet:
    """Apply the temporal policy to every (selected) stamp at every depth."""
    return shift_elements(ds, policy, offset, pair_table, select)[0]


# -- ages -------------------------------------------------------------------

_AS_RE = re.compile(r"^(\d{3})([DWMY])$")


def age_in_years(age: str) -> float:
    m = _AS_RE.match(age.strip())
    if not m:
        raise BadAgeFormat(age)
    n, unit = int(m.group(1)), m.group(2)
    return {"D": n / 365.25, "W": n * 7 / 365.25, "M": n / 12, "Y": float(n)}[unit]


def generalize_age(age: str, policy: TemporalPolicy) -> str:
    """Top-code ages above the threshold and optionally bin by decade.

    The top-code value ``%03dY`` of threshold+1 ("090Y" by default) stands for
    that age or older.
    """
    years = age_in_years(age)
    top = policy.age_topcode_years
    if years > top:
        return "%03dY" % (top + 1)
    if policy.age_bin == "DECADE":
        return "%03dY" % (int(years) // 10 * 10)
    return age.strip()
