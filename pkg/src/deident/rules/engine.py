"""Rule resolution and application over a whole file."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..dicom import syntax
from ..dicom.dataset import DataSet, Element, FileObject, encode_text, text_element
from ..dicom.tag import Tag
from ..dicom.validate import validate_vr
from ..dicom.vr import CLEANABLE_VRS, TEMPORAL_VRS
from ..dicom.walk import REMOVE, Path, format_path, walk
from ..remap import RemapSession
from ..temporal import REQUIRED_STAMPS, BadAgeFormat, TemporalPolicy, generalize_age, load_pair_table, shift_elements
from ..textscan import DROP, IdentifierIndex, clean_text, scan_text
from .actions import Action, OptionId
from .config import ProfileConfig
from .dummy import synthesize_dummy
from .errors import NoDummyForVR, QuarantineObject
from .private import SafePrivateList, load_safe_private
from .provenance import IMPLEMENTATION_CLASS_UID, IMPLEMENTATION_VERSION, stamp_provenance
from .table import RuleTable

log = logging.getLogger(__name__)

SOP_CLASS_UID = Tag(0x0008, 0x0016)
SOP_INSTANCE_UID = Tag(0x0008, 0x0018)
CONVERSION_TYPE = Tag(0x0008, 0x0064)
PATIENT_NAME = Tag(0x0010, 0x0010)
PATIENT_ID = Tag(0x0010, 0x0020)
TRAILING_PADDING = Tag(0xFFFC, 0xFFFC)


@dataclass
class AuditRecord:
    path: Path
    tag: Tag
    action: Action
    reason: str
    value_changed: bool
    note: str = ""

    def row(self) -> list[str]:
        return [format_path(self.path), str(self.tag), self.action.value, self.reason,
                "1" if self.value_changed else "0", self.note]


def _resolve(tag: Tag, vr: str, is_private: bool, config: ProfileConfig, table: RuleTable,
             safe: SafePrivateList | None, creator: str | None) -> tuple[Action, str]:
    options = config.options
    if is_private:
        retain = OptionId.RetainSafePrivate in options
        if tag.is_private_creator:
            return (Action.KEEP if retain else Action.REMOVE), "private-creator"
        if retain and safe is not None and safe.lookup(creator, tag, vr) is not None:
            return Action.KEEP, "safe-private"
        return Action.REMOVE, "private-default"
    if tag.is_group_length:
        return Action.REMOVE, "group-length"
    rule = table.lookup(tag)
    if rule is not None:
        action, reason = rule.action_for(options), rule.rule_id
    else:
        reason = "unknown-default"
        if vr in TEMPORAL_VRS:
            action = Action.REMOVE if config.temporal_mode == "REMOVE_ALL" else Action.TEMPORAL
        elif vr == "UI":
            action = Action.REMAP_UID
        else:
            action = Action.REMOVE

    if action is Action.REMAP_UID and OptionId.RetainUIDs in options:
        action = Action.KEEP
    if action is Action.TEMPORAL:
        if vr not in TEMPORAL_VRS:
            action = Action.REMOVE
        elif config.temporal_mode == "REMOVE_ALL":
            action = Action.DUMMY if tag in REQUIRED_STAMPS else Action.REMOVE
        elif config.temporal_mode == "RETAIN_FULL":
            action = Action.KEEP
    elif action is Action.REMAP_UID and vr != "UI":
        action = Action.REMOVE
    elif action is Action.CLEAN and vr not in CLEANABLE_VRS and vr != "SQ":
        action = Action.REMOVE
    return action, reason


def resolve_action(tag: Tag, vr: str, is_private: bool, config: ProfileConfig, table: RuleTable,
                   safe: SafePrivateList | None = None, creator: str | None = None) -> Action:
    """The single action for one element; total over all inputs."""
    return _resolve(Tag(*tag), vr, is_private, config, table, safe, creator)[0]


def _creator_index(ds: DataSet, prefix: Path = (), out: dict | None = None) -> dict:
    """Map dataset path prefix -> {(group, block): creator string}."""
    if out is None:
        out = {}
    level = {}
    for el in ds:
        if el.tag.is_private_creator and not el.is_sequence:
            level[(el.tag.group, el.tag.element)] = el.raw.decode("latin-1").strip(" \x00")
        if el.is_sequence:
            for i, item in enumerate(el.items):
                _creator_index(item, prefix + (el.tag, i), out)
    out[prefix] = level
    return out


def _purge_creators(ds: DataSet, prefix: Path, audit: list[AuditRecord]) -> None:
    """Drop private creators whose block has no surviving element."""
    used = {(t.group, t.private_block) for t in ds.tags() if t.private_block is not None}
    for el in list(ds):
        tag = el.tag
        if tag.is_private_creator:
            keep = (tag.group, tag.element) in used
            if not keep:
                del ds[tag]
            audit.append(AuditRecord(prefix + (tag,), tag, Action.KEEP if keep else Action.REMOVE,
                                     "private-creator" if keep else "private-creator-unused", not keep))
        if el.is_sequence and tag in ds:
            for i, item in enumerate(el.items):
                _purge_creators(item, prefix + (tag, i), audit)


def _element_at(ds: DataSet, path: Path) -> Element | None:
    cur = ds
    for i in range(0, len(path) - 1, 2):
        el = cur.get(path[i])
        if el is None or not el.is_sequence or path[i + 1] >= len(el.items):
            return None
        cur = el.items[path[i + 1]]
    return cur.get(path[-1])


def _set_at(ds: DataSet, path: Path, element: Element) -> None:
    cur = ds
    for i in range(0, len(path) - 1, 2):
        cur = cur[path[i]].items[path[i + 1]]
    cur[path[-1]] = element


def _empty(el: Element) -> Element:
    if el.is_sequence:
        return Element(el.tag, el.vr, [], undefined_length=el.undefined_length)
    return Element(el.tag, el.vr, b"")


def _quarantine_reason(file: FileObject, config: ProfileConfig) -> str | None:
    if file.transfer_syntax not in syntax.SUPPORTED:
        return f"unsupported transfer syntax {file.transfer_syntax}"
    sop_class = file.body.text(SOP_CLASS_UID)
    if sop_class and config.is_quarantined_sop(sop_class):
        return f"quarantined SOP class {sop_class}"
    conversion = file.body.text(CONVERSION_TYPE)
    if conversion and conversion in config.quarantine_conversion_types:
        return f"conversion type {conversion}"
    return None


def patient_key_of(ds: DataSet) -> str:
    return ds.text(PATIENT_ID) or ds.text(PATIENT_NAME) or "UNKNOWN"


def output_transfer_syntax(ts: str) -> str:
    enc = syntax.encoding(ts)
    if enc is not None and not enc.encapsulated:
        return syntax.EXPLICIT_LE
    return ts


def build_meta(body: DataSet, transfer_syntax: str) -> DataSet:
    meta = DataSet()
    meta.add(Element(Tag(0x0002, 0x0000), "UL", b"\0\0\0\0"))
    meta.add(Element(Tag(0x0002, 0x0001), "OB", b"\x00\x01"))
    meta.add(text_element((0x0002, 0x0002), "UI", body.text(SOP_CLASS_UID)))
    meta.add(text_element((0x0002, 0x0003), "UI", body.text(SOP_INSTANCE_UID)))
    meta.add(text_element((0x0002, 0x0010), "UI", transfer_syntax))
    meta.add(text_element((0x0002, 0x0012), "UI", IMPLEMENTATION_CLASS_UID))
    meta.add(text_element((0x0002, 0x0013), "SH", IMPLEMENTATION_VERSION))
    return meta


@dataclass
class Engine:
    """Bundles the immutable inputs of ``apply``."""

    config: ProfileConfig
    table: RuleTable
    safe: SafePrivateList | None = None
    pair_table: list | None = None
    notes: tuple = ()

    def __post_init__(self):
        if self.safe is None:
            self.safe = load_safe_private()
        if self.pair_table is None:
            self.pair_table = load_pair_table()

    def apply(self, file: FileObject, session: RemapSession,
              index: IdentifierIndex | None = None) -> tuple[FileObject, list[AuditRecord]]:
        return apply(file, self.config, self.table, session, self.safe, self.pair_table, index, self.notes)


def apply(file: FileObject, config: ProfileConfig, table: RuleTable, session: RemapSession,
          safe: SafePrivateList | None = None, pair_table=None, index: IdentifierIndex | None = None,
          notes=()) -> tuple[FileObject, list[AuditRecord]]:
    """De-identify one file; the input object is left untouched."""
    reason = _quarantine_reason(file, config)
    if reason:
        raise QuarantineObject(reason)
    if safe is None:
        safe = load_safe_private()
    if pair_table is None:
        pair_table = load_pair_table()

    body = file.body
    policy = TemporalPolicy.from_config(config)
    patient = patient_key_of(body)
    pseudonym = session.pseudonym(patient) if config.pseudonym_policy == "PSEUDONYM" else None
    offset = session.offset(patient, policy.offset_range_days, policy.shift_times_too) \
        if policy.mode == "SHIFT" else None
    if index is None:
        index = IdentifierIndex.build(body, config.min_token_len)
    creators = _creator_index(body)

    audit: list[AuditRecord] = []
    by_path: dict[Path, AuditRecord] = {}
    temporal_paths: set[Path] = set()

    def record(path, tag, action, why, changed, note=""):
        rec = AuditRecord(path, tag, action, why, changed, note)
        audit.append(rec)
        by_path[path] = rec

    def visit(path: Path, el: Element):
        tag = el.tag
        if tag == TRAILING_PADDING:
            record(path, tag, Action.REMOVE, "trailing-padding", True)
            return REMOVE
        creator = None
        if tag.private_block is not None:
            creator = creators.get(path[:-1], {}).get((tag.group, tag.private_block))
        action, why = _resolve(tag, el.vr, tag.is_private, config, table, safe, creator)

        if tag.is_private_creator:
            if action is Action.KEEP:
                return None  # settled once the surviving elements are known
            record(path, tag, Action.REMOVE, why, True)
            return REMOVE

        if action is Action.REMOVE:
            record(path, tag, action, why, True)
            return REMOVE

        if action is Action.KEEP:
            if why == "safe-private" and el.vr == "UN":
                entry = safe.lookup(creator, tag, el.vr)
                record(path, tag, action, why, False, f"VR set to {entry.vr}")
                return Element(tag, entry.vr, el.value)
            if el.vr == "AS" and not el.is_empty:
                try:
                    new = generalize_age(el.str_value, policy)
                except BadAgeFormat:
                    record(path, tag, Action.REMOVE, why, True, "unparseable age")
                    return REMOVE
                changed = new != el.str_value
                record(path, tag, action, why, changed, "age generalized" if changed else "")
                return Element(tag, "AS", encode_text("AS", new)) if changed else None
            record(path, tag, action, why, False)
            return None

        if action is Action.ZERO:
            record(path, tag, action, why, not el.is_empty)
            return _empty(el)

        if action is Action.DUMMY:
            if tag in (PATIENT_ID, PATIENT_NAME) and pseudonym is not None:
                record(path, tag, action, why, True, "pseudonym")
                return Element(tag, el.vr, encode_text(el.vr, pseudonym))
            try:
                value = synthesize_dummy(el.vr, tag, config)
            except NoDummyForVR:
                record(path, tag, Action.ZERO, why, not el.is_empty, f"no dummy for {el.vr}")
                return _empty(el)
            raw = value if isinstance(value, bytes) else encode_text(el.vr, value)
            record(path, tag, action, why, el.is_sequence or el.raw != raw)
            return Element(tag, el.vr, raw)

        if action is Action.CLEAN:
            if el.is_sequence:
                record(path, tag, action, why, False, "items cleaned element by element")
                return None
            text = el.str_value
            findings = scan_text(text, index, config.allowlist)
            result = clean_text(text, findings, config.text_mode)
            if result is DROP:
                record(path, tag, Action.ZERO, why, True, f"{len(findings)} findings")
                return _empty(el)
            if result == text:
                record(path, tag, action, why, False)
                return None
            record(path, tag, action, why, True, f"{len(findings)} findings")
            return Element(tag, el.vr, encode_text(el.vr, result))

        if action is Action.REMAP_UID:
            text = el.raw.decode("latin-1").rstrip("\x00 ")
            if not text:
                record(path, tag, action, why, False)
                return None
            new = session.remap_value(text)
            record(path, tag, action, why, True)
            return Element(tag, "UI", encode_text("UI", new))

        if action is Action.TEMPORAL:
            temporal_paths.add(path)
            record(path, tag, action, why, False)
            return None
        raise AssertionError(action)

    out = walk(body, visit)

    if temporal_paths:
        out, outcomes = shift_elements(out, policy, offset, pair_table, lambda p, e: p in temporal_paths)
        for path, outcome in outcomes.items():
            rec = by_path[path]
            if outcome == "unparseable":
                rec.action, rec.value_changed, rec.note = Action.REMOVE, True, "unparseable date, removed"
            elif outcome in ("removed",):
                rec.action, rec.value_changed = Action.REMOVE, True
            else:
                new = _element_at(out, path)
                old = _element_at(body, path)
                rec.value_changed = new is None or old is None or new.raw != old.raw
                rec.note = outcome

    _purge_creators(out, (), audit)

    # a replacement must never add a VR violation; empty it instead
    changed = {r.path for r in audit if r.value_changed and r.action is not Action.REMOVE}
    for v in validate_vr(out):
        if v.path in changed:
            el = _element_at(out, v.path)
            if el is not None:
                _set_at(out, v.path, _empty(el))
                rec = by_path.get(v.path)
                if rec is not None:
                    rec.action, rec.note = Action.ZERO, f"replacement failed {v.kind} check"

    out = stamp_provenance(out, config, notes)
    ts = output_transfer_syntax(file.transfer_syntax)
    result = FileObject(preamble=b"\x00" * 128, meta=build_meta(out, ts), body=out, transfer_syntax=ts)
    return result, audit
