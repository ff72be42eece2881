"""Per-VR value checks.  Validation reports, it never raises."""

from __future__ import annotations

import re
from datetime import date
from typing import NamedTuple

from .dataset import DataSet, Element
from .tag import Tag
from .vr import VR_SPECS
from .walk import Path, iter_elements


class Violation(NamedTuple):
    path: Path
    tag: Tag
    vr: str
    kind: str  # "length", "charset" or "format"
    detail: str


_DA = re.compile(r"^(\d{4})(\d{2})(\d{2})$")
_TM = re.compile(r"^(\d{2})(?:(\d{2})(?:(\d{2})(?:\.\d{1,6})?)?)?$")
_DT = re.compile(
    r"^(\d{4})(?:(\d{2})(?:(\d{2})(?:(\d{2})(?:(\d{2})(?:(\d{2})(?:\.\d{1,6})?)?)?)?)?)?"
    r"(?:[+-]\d{4})?$"
)
_AS = re.compile(r"^\d{3}[DWMY]$")
_CS = re.compile(r"^[A-Z0-9 _]*$")
_DS = re.compile(r"^ *[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)? *$")
_IS = re.compile(r"^ *[+-]?\d+ *$")
_UID = re.compile(r"^(0|[1-9]\d*)(\.(0|[1-9]\d*))*$")
# Default repertoire plus ESC for single-line text; multi-line VRs also allow CR LF FF TAB.
_CTRL_SINGLE = re.compile(r"[\x00-\x1a\x1c-\x1f\x7f]")
_CTRL_MULTI = re.compile(r"[\x00-\x08\x0b\x0e-\x1a\x1c-\x1f\x7f]")
_MULTILINE = {"LT", "ST", "UT"}


def is_valid_uid(uid: str) -> bool:
    return 0 < len(uid) <= 64 and _UID.match(uid) is not None


def _valid_date(y: str, m: str, d: str) -> bool:
    try:
        date(int(y), int(m), int(d))
    except ValueError:
        return False
    return True


def _valid_time(hh: str, mm: str | None, ss: str | None) -> bool:
    if int(hh) > 23:
        return False
    if mm is not None and int(mm) > 59:
        return False
    return ss is None or int(ss) <= 60


def check_value(vr: str, value: str) -> tuple[str, str] | None:
    """Check one (already split) text value; returns (kind, detail) or None."""
    if value == "":
        return None
    spec = VR_SPECS[vr]
    if vr == "PN":
        groups = value.split("=")
        if len(groups) > 3:
            return "format", "more than three component groups"
        for g in groups:
            if len(g) > 64:
                return "length", f"component group of {len(g)} chars exceeds 64"
            if g.count("^") > 4:
                return "format", "more than five name components"
    elif spec.max_len is not None and len(value) > spec.max_len:
        return "length", f"{len(value)} chars exceeds {spec.max_len}"

    ctrl = _CTRL_MULTI if vr in _MULTILINE else _CTRL_SINGLE
    if vr not in ("UI",) and ctrl.search(value):
        return "charset", "control character"

    if vr == "DA":
        m = _DA.match(value)
        if not m or not _valid_date(*m.groups()):
            return "format", f"{value!r} is not YYYYMMDD"
    elif vr == "TM":
        m = _TM.match(value.rstrip())
        if not m or not _valid_time(*m.groups()):
            return "format", f"{value!r} is not HHMMSS.FFFFFF"
    elif vr == "DT":
        m = _DT.match(value.rstrip())
        if not m:
            return "format", f"{value!r} is not a date-time"
        y, mo, d, hh, mi, ss = m.groups()
        if mo is not None and not 1 <= int(mo) <= 12:
            return "format", "month out of range"
        if d is not None and not _valid_date(y, mo, d):
            return "format", "day out of range"
        if hh is not None and not _valid_time(hh, mi, ss):
            return "format", "time out of range"
    elif vr == "AS":
        if not _AS.match(value):
            return "format", f"{value!r} is not nnn[DWMY]"
    elif vr == "CS":
        if not _CS.match(value):
            return "charset", f"{value!r} has characters outside A-Z 0-9 space underscore"
    elif vr == "DS":
        if not _DS.match(value):
            return "format", f"{value!r} is not a decimal string"
    elif vr == "IS":
        if not _IS.match(value):
            return "format", f"{value!r} is not an integer string"
        if not -(2 ** 31) <= int(value) < 2 ** 31:
            return "format", "integer string out of range"
    elif vr == "UI":
        if not _UID.match(value):
            return "format", f"{value!r} is not a valid UID"
    return None


def check_element(el: Element) -> list[tuple[str, str]]:
    spec = VR_SPECS.get(el.vr)
    if spec is None or el.is_sequence or el.is_encapsulated:
        return []
    raw = el.raw
    if spec.kind in ("binary", "bytes"):
        if spec.item_size and len(raw) % spec.item_size and el.vr not in ("OB", "UN"):
            return [("length", f"{len(raw)} bytes is not a multiple of {spec.item_size}")]
        return []
    if el.vr == "UI":
        text = raw.decode("latin-1").rstrip("\x00").rstrip(" ")
    else:
        text = el.str_value
    values = text.split("\\") if spec.multi_valued else [text]
    out = []
    for v in values:
        if el.vr != "UI":
            v = v.strip(" ") if el.vr not in ("LT", "ST", "UT") else v
        problem = check_value(el.vr, v)
        if problem:
            out.append(problem)
    return out


def validate_vr(ds: DataSet) -> list[Violation]:
    """One Violation per offending value, at every nesting level."""
    out: list[Violation] = []
    for path, el in iter_elements(ds):
        try:
            problems = check_element(el)
        except Exception as exc:  # never throw
            problems = [("format", f"unreadable value: {exc}")]
        for kind, detail in problems:
            out.append(Violation(path, el.tag, el.vr, kind, detail))
    return out
