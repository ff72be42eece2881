"""Outcome checks: original versus de-identified, element by element."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .dicom.dataset import DataSet, Element, FileObject, encode_text
from .dicom.tag import Tag, TagPattern
from .dicom.validate import check_element, is_valid_uid, validate_vr
from .dicom.vr import CLEANABLE_VRS, TEMPORAL_VRS
from .dicom.walk import Path, format_path, iter_elements
from .dicom.writer import serialize
from .rules.actions import Action, OptionId
from .rules.config import ProfileConfig
from .rules.dummy import synthesize_dummy
from .rules.errors import NoDummyForVR
from .rules.private import SafePrivateList
from .rules.table import RuleTable
from .temporal import REQUIRED_STAMPS, TemporalPolicy, generalize_age, parse_da
from .textscan import IdentifierIndex, scan_text

REMOVED, EMPTIED, DUMMIED, KEPT_EQUAL = "REMOVED", "EMPTIED", "DUMMIED", "KEPT_EQUAL"
CHANGED_VALID_UID, SHIFTED_DATE, CLEANED = "CHANGED_VALID_UID", "SHIFTED_DATE", "CLEANED"

RESIDUAL, CONFORMANCE, PRIVATE, PROVENANCE = "RESIDUAL_TOKEN", "CONFORMANCE", "PRIVATE_RETAINED", "PROVENANCE"

# written by the provenance stamp, so checked on their own terms
PIXEL_DATA = Tag(0x7FE0, 0x0010)
_SUSPECT_VRS = frozenset({"LO", "SH", "ST", "LT", "UT", "PN", "UC"})
_PROVENANCE_TAGS = {Tag(0x0012, 0x0062), Tag(0x0012, 0x0063), Tag(0x0012, 0x0064),
                    Tag(0x0028, 0x0303), Tag(0x0018, 0xA001)}
SOP_CLASS_UID, SOP_INSTANCE_UID = Tag(0x0008, 0x0016), Tag(0x0008, 0x0018)
TRAILING_PADDING = Tag(0xFFFC, 0xFFFC)


class PairMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Expectation:
    pattern: TagPattern | None  # None: default for unlisted tags of ``vr_class``
    expected: str
    rule_id: str = ""
    vr_class: str = ""


def _expected_for(action: Action, config: ProfileConfig, tag: Tag | None) -> str:
    mode = config.temporal_mode
    if action is Action.REMAP_UID:
        return KEPT_EQUAL if config.has(OptionId.RetainUIDs) else CHANGED_VALID_UID
    if action is Action.TEMPORAL:
        if mode == "SHIFT":
            return SHIFTED_DATE
        if mode == "RETAIN_FULL":
            return KEPT_EQUAL
        return DUMMIED if tag in REQUIRED_STAMPS else REMOVED
    return {Action.REMOVE: REMOVED, Action.ZERO: EMPTIED, Action.DUMMY: DUMMIED,
            Action.KEEP: KEPT_EQUAL, Action.CLEAN: CLEANED}[action]


def derive_expectations(table: RuleTable, config: ProfileConfig) -> list[Expectation]:
    """One expectation per rule row under the active options, plus the defaults for unlisted tags."""
    out = []
    for rule in table:
        tag = rule.pattern.tag() if rule.pattern.is_exact else None
        out.append(Expectation(rule.pattern, _expected_for(rule.action_for(config.options), config, tag),
                               rule.rule_id))
    temporal_default = Action.REMOVE if config.temporal_mode == "REMOVE_ALL" else Action.TEMPORAL
    out.append(Expectation(None, _expected_for(temporal_default, config, None), "default temporal", "temporal"))
    out.append(Expectation(None, _expected_for(Action.REMAP_UID, config, None), "default UI", "UI"))
    out.append(Expectation(None, REMOVED, "default", "other"))
    return out


class _ExpectationIndex:
    def __init__(self, expectations):
        self.exact: dict[Tag, Expectation] = {}
        self.masked: list[Expectation] = []
        self.defaults: dict[str, Expectation] = {}
        for e in expectations:
            if e.pattern is None:
                self.defaults[e.vr_class] = e
            elif e.pattern.is_exact:
                self.exact[e.pattern.tag()] = e
            else:
                self.masked.append(e)
        self.masked.sort(key=lambda e: -e.pattern.specificity)

    def lookup(self, tag: Tag, vr: str) -> Expectation:
        hit = self.exact.get(tag)
        if hit is not None:
            return hit
        for e in self.masked:
            if e.pattern.matches(tag):
                return e
        cls = "temporal" if vr in TEMPORAL_VRS else "UI" if vr == "UI" else "other"
        return self.defaults.get(cls, Expectation(None, REMOVED, "default", cls))


@dataclass
class Failure:
    file: str
    path: str
    tag: str
    category: str
    detail: str


@dataclass
class EvalReport:
    counts: dict = field(default_factory=dict)  # category -> [passed, failed]
    failures: list = field(default_factory=list)
    residual_hits: list = field(default_factory=list)
    conformance_delta: dict = field(default_factory=dict)  # file -> violations out - in
    suspicious: Counter = field(default_factory=Counter)
    files: int = 0
    checked: int = 0

    def tally(self, category: str, ok: bool, file: str = "", path: Path = (), tag=None, detail: str = "") -> None:
        passed, failed = self.counts.get(category, (0, 0))
        self.counts[category] = (passed + ok, failed + (not ok))
        self.checked += 1
        if not ok:
            self.failures.append(Failure(file, format_path(path) if isinstance(path, tuple) else path,
                                         str(tag) if tag is not None else "", category, detail))

    def merge(self, other: "EvalReport") -> "EvalReport":
        out = EvalReport()
        for rep in (self, other):
            for k, (p, f) in rep.counts.items():
                a, b = out.counts.get(k, (0, 0))
                out.counts[k] = (a + p, b + f)
            out.failures += rep.failures
            out.residual_hits += rep.residual_hits
            out.conformance_delta.update(rep.conformance_delta)
            out.suspicious.update(rep.suspicious)
            out.files += rep.files
            out.checked += rep.checked
        return out

    @property
    def failure_count(self) -> int:
        return sum(f for _, f in self.counts.values())

    @property
    def failure_categories(self) -> set[str]:
        return {k for k, (_, f) in self.counts.items() if f}

    @property
    def ok(self) -> bool:
        return self.failure_count == 0

    def to_text(self, max_exemplars: int = 200, public: bool = False) -> str:
        """Full text, or with ``public`` only the counts (exemplars quote original values)."""
        lines = [f"files\t{self.files}", f"checks\t{self.checked}", f"failures\t{self.failure_count}",
                 "# category\tpassed\tfailed"]
        for k in sorted(self.counts):
            p, f = self.counts[k]
            lines.append(f"{k}\t{p}\t{f}")
        worst = max(self.conformance_delta.values(), default=0)
        lines.append(f"max_conformance_delta\t{worst}")
        lines.append(f"residual_hits\t{len(self.residual_hits)}")
        if public:
            return "\n".join(lines) + "\n"
        lines.append("# exemplars: file\tpath\ttag\tcategory\tdetail")
        for fl in self.failures[:max_exemplars]:
            lines.append(f"{fl.file}\t{fl.path}\t{fl.tag}\t{fl.category}\t{fl.detail}")
        if self.suspicious:
            lines.append("# suspicious strings: count\tstring")
            for s, n in sorted(self.suspicious.items()):
                lines.append(f"{n}\t{s}")
        return "\n".join(lines) + "\n"


def _element_at(ds: DataSet, path: Path) -> Element | None:
    cur = ds
    for i in range(0, len(path) - 1, 2):
        el = cur.get(path[i])
        if el is None or not el.is_sequence or path[i + 1] >= len(el.items):
            return None
        cur = el.items[path[i + 1]]
    return cur.get(path[-1])


def _text(el: Element) -> str:
    return el.raw.decode("latin-1").rstrip("\x00 ") if not el.is_sequence else ""


def _check(exp: str, orig: Element, out: Element | None, config: ProfileConfig,
           index: IdentifierIndex | None, deltas: list) -> tuple[bool, str]:
    if exp == REMOVED:
        return out is None, "element still present"
    if out is None:
        return False, "element missing"
    if exp == EMPTIED:
        return out.is_empty, "element not empty"
    if exp == DUMMIED:
        if orig.is_sequence:
            return True, ""
        if out.is_empty:
            return orig.is_empty, "dummy is empty"
        if _text(out) != _text(orig):
            return True, ""
        # only acceptable when the original already was the dummy
        try:
            dummy = synthesize_dummy(orig.vr, orig.tag, config)
        except NoDummyForVR:
            return False, "value unchanged"
        raw = dummy if isinstance(dummy, bytes) else encode_text(orig.vr, dummy)
        return raw.rstrip(b"\x00 ") == orig.raw.rstrip(b"\x00 "), "value unchanged"
    if exp == KEPT_EQUAL:
        if orig.is_sequence or orig.is_encapsulated:
            return True, ""
        if orig.vr == "AS" and not orig.is_empty:
            try:
                want = generalize_age(orig.str_value, TemporalPolicy.from_config(config))
            except ValueError:
                return False, "unparseable age kept"
            return out.str_value == want, f"age {out.str_value!r} != {want!r}"
        return _text(out) == _text(orig), "value changed"
    if exp == CHANGED_VALID_UID:
        a, b = _text(orig), _text(out)
        if not a:
            return not b, "empty UID filled"
        olds, news = a.split("\\"), b.split("\\")
        if len(olds) != len(news):
            return False, "UID multiplicity changed"
        for o, n in zip(olds, news):
            if not is_valid_uid(n):
                return False, f"invalid UID {n!r}"
            if o and n == o:
                return False, "UID not remapped"
        return True, ""
    if exp == SHIFTED_DATE:
        if orig.is_empty:
            return out.is_empty, "empty date filled"
        problems = check_element(out)
        if problems:
            return False, problems[0][1]
        if out.vr == "DA":
            try:
                d0, d1 = parse_da(orig.str_value), parse_da(out.str_value)
            except ValueError:
                return False, "unparseable date"
            delta = (d1 - d0).days
            lo, hi = config.offset_range_days
            deltas.append(delta)
            return lo <= delta <= hi + 1, f"shift of {delta} days outside the configured range"
        return True, ""
    if exp == CLEANED:
        if orig.is_sequence or out.is_empty:
            return True, ""
        text = out.str_value.lower()
        hits = [t for t in (index.tokens() if index else ()) if t in text]
        return not hits, f"identifier {hits[0]!r} survives" if hits else ""
    raise ValueError(exp)


def _normalize(exp: str, vr: str) -> str:
    if exp == CLEANED and vr != "SQ" and vr not in CLEANABLE_VRS:
        return REMOVED
    if exp == CHANGED_VALID_UID and vr != "UI":
        return REMOVED
    if exp == SHIFTED_DATE and vr not in TEMPORAL_VRS:
        return REMOVED
    if exp == CLEANED and vr == "SQ":
        return KEPT_EQUAL
    return exp


def evaluate_pair(original: FileObject, deidentified: FileObject, expectations, index: IdentifierIndex | None = None,
                  config: ProfileConfig | None = None, safe: SafePrivateList | None = None, planted=(),
                  name: str = "", uid_map: dict | None = None, output_bytes: bytes | None = None,
                  pixels_redacted: bool = False) -> EvalReport:
    """Check one pair; ``planted`` tokens are grepped over the serialized output bytes."""
    config = config or ProfileConfig()
    src, dst = original.body, deidentified.body
    if src.text(SOP_CLASS_UID) != dst.text(SOP_CLASS_UID):
        raise PairMismatch(f"{name}: SOP classes differ")
    if uid_map is not None:
        want = uid_map.get(src.text(SOP_INSTANCE_UID))
        if want is not None and want != dst.text(SOP_INSTANCE_UID):
            raise PairMismatch(f"{name}: output is not the remapped instance")
    if index is None:
        index = IdentifierIndex.build(src, config.min_token_len)
    idx = expectations if isinstance(expectations, _ExpectationIndex) else _ExpectationIndex(expectations)
    report = EvalReport(files=1)
    retain_private = config.has(OptionId.RetainSafePrivate)

    gone: set[Path] = set()  # subtrees that were expected to vanish
    deltas: list[int] = []
    for path, el in iter_elements(src):
        tag = el.tag
        if any(path[:i] in gone for i in range(1, len(path), 2)):
            continue
        if len(path) == 1 and tag in _PROVENANCE_TAGS:
            continue
        if tag == TRAILING_PADDING:
            ok = _element_at(dst, path) is None
            report.tally(REMOVED, ok, name, path, tag, "trailing padding present")
            continue
        if pixels_redacted and path == (PIXEL_DATA,):
            out = _element_at(dst, path)
            ok = out is not None and out.vr == el.vr and (
                el.is_encapsulated or len(out.raw) == len(el.raw))
            report.tally(CLEANED, ok, name, path, tag, "redacted pixel data lost its geometry")
            continue
        if tag.is_private or tag.is_group_length:
            if tag.is_group_length:
                report.tally(REMOVED, _element_at(dst, path) is None, name, path, tag, "group length present")
            continue
        exp = _normalize(idx.lookup(tag, el.vr).expected, el.vr)
        out = _element_at(dst, path)
        ok, detail = _check(exp, el, out, config, index, deltas)
        report.tally(exp, ok, name, path, tag, detail)
        if exp in (REMOVED, EMPTIED):
            gone.add(path)
    if deltas and max(deltas) - min(deltas) > (1 if config.shift_times_too else 0):
        report.tally(SHIFTED_DATE, False, name, (), None, f"inconsistent day offsets {sorted(set(deltas))}")

    # private elements in the output
    for path, el in iter_elements(dst):
        if not el.tag.is_private:
            continue
        if el.tag.is_private_creator:
            continue
        allowed = False
        if retain_private and safe is not None:
            parent = dst
            for i in range(0, len(path) - 1, 2):
                parent = parent[path[i]].items[path[i + 1]]
            creator_el = parent.get(Tag(el.tag.group, el.tag.private_block)) if el.tag.private_block else None
            creator = creator_el.str_value.strip() if creator_el is not None and not creator_el.is_sequence else None
            allowed = safe.lookup(creator, el.tag, el.vr) is not None
        report.tally(PRIVATE, allowed, name, path, el.tag, "private element survived")

    # provenance
    flag = dst.text(Tag(0x0012, 0x0062))
    report.tally(PROVENANCE, flag == "YES", name, (Tag(0x0012, 0x0062),), Tag(0x0012, 0x0062),
                 f"PatientIdentityRemoved is {flag!r}")
    methods = dst.get(Tag(0x0012, 0x0064))
    report.tally(PROVENANCE, methods is not None and methods.is_sequence and len(methods.items) > 0, name,
                 (Tag(0x0012, 0x0064),), Tag(0x0012, 0x0064), "no method code sequence")

    # conformance: violations out minus violations in
    delta = len(validate_vr(dst)) - len(validate_vr(src))
    report.conformance_delta[name] = delta
    report.tally(CONFORMANCE, delta <= 0, name, (), None, f"{delta} new VR violations")

    # pattern hits in retained free text: reported, never counted as failures
    for _, el in iter_elements(dst):
        if el.vr in _SUSPECT_VRS and not el.is_empty:
            for value in el.values:
                for f in scan_text(value):
                    report.suspicious[f.matched] += 1

    # residual planted tokens anywhere in the output bytes
    data = output_bytes if output_bytes is not None else serialize(deidentified)
    for token in planted:
        raw = token.encode("latin-1") if isinstance(token, str) else token
        pos = data.find(raw)
        ok = pos < 0
        if not ok:
            report.residual_hits.append((name, token, pos))
        report.tally(RESIDUAL, ok, name, f"@{pos}", None, f"token {token!r} found at byte {pos}")
    return report


def expectation_index(expectations) -> _ExpectationIndex:
    return _ExpectationIndex(expectations)


__all__ = [
    "CHANGED_VALID_UID", "CLEANED", "CONFORMANCE", "DUMMIED", "EMPTIED", "EvalReport", "Expectation",
    "Failure", "KEPT_EQUAL", "PRIVATE", "PROVENANCE", "PairMismatch", "REMOVED", "RESIDUAL", "SHIFTED_DATE",
    "derive_expectations", "evaluate_pair", "expectation_index",
]
