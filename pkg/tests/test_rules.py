import pytest
from hypothesis import given, settings, strategies as st

from deident.dicom import syntax
from deident.dicom.dataset import DataSet, Element, FileObject, sequence_element, text_element
from deident.dicom.tag import Tag
from deident.dicom.validate import validate_vr
from deident.dicom.walk import iter_elements
from deident.remap import RemapSession
from deident.rules import (Action, OptionId, ProfileConfig, apply, load_config, load_rule_table, parse_config,
                           parse_rule_table, resolve_action, synthesize_dummy)
from deident.rules.errors import ConfigError, DuplicateRule, MalformedPattern, NoDummyForVR, QuarantineObject, \
    UnknownActionCode
from deident.rules.private import load_safe_private, parse_safe_private
from deident.synthetic import make_corpus_file, quarantinable_pdf

TABLE = load_rule_table()
BASE = load_config()


def session():
    return RemapSession(secret=b"s" * 32)


def small_file(extra=()):
    body = DataSet([
        text_element((0x0008, 0x0016), "UI", "1.2.840.10008.5.1.4.1.1.2"),
        text_element((0x0008, 0x0018), "UI", "1.2.3.4.5.6"),
        text_element((0x0008, 0x0020), "DA", "20200102"),
        text_element((0x0008, 0x0060), "CS", "CT"),
        text_element((0x0008, 0x0080), "LO", "General Hospital"),
        text_element((0x0008, 0x1030), "LO", "CT head for Smith"),
        text_element((0x0010, 0x0010), "PN", "Smith^John"),
        text_element((0x0010, 0x0020), "LO", "MRN998877"),
        text_element((0x0010, 0x0040), "CS", "M"),
        text_element((0x0010, 0x1010), "AS", "093Y"),
        text_element((0x0020, 0x000D), "UI", "1.2.3.4.5.7"),
    ] + list(extra))
    meta = DataSet([text_element((0x0002, 0x0010), "UI", syntax.EXPLICIT_LE)])
    return FileObject(b"\x01" * 128, meta, body, syntax.EXPLICIT_LE)


def test_parse_rule_table_precedence():
    text = ("tag\tkeyword\tbaseline\tRetainUIDs\tCleanDescriptors\n"
            "0010,0010\tPatientName\tDUMMY\t-\t-\n"
            "60xx,xxxx\tOverlay\tREMOVE\t-\t-\n"
            "60xx,3000\tOverlayData\tKEEP\t-\tCLEAN\n"
            "0020,000D\tStudyUID\tREMAP_UID\tKEEP\t-\n")
    t = parse_rule_table(text)
    assert t.lookup(Tag(0x6002, 0x3000)).keyword == "OverlayData"
    assert t.lookup(Tag(0x6002, 0x0010)).keyword == "Overlay"
    assert t.lookup(Tag(0x0020, 0x000D)).action_for({OptionId.RetainUIDs}) is Action.KEEP
    assert t.lookup(Tag(0x0020, 0x000D)).action_for(set()) is Action.REMAP_UID
    assert t.lookup(Tag(0x0010, 0x0020)) is None


@pytest.mark.parametrize("text,err", [
    ("0010,0010\tA\tDUMMY\n0010,0010\tB\tKEEP\n", DuplicateRule),
    ("0010,0010\tA\tSHRED\n", UnknownActionCode),
    ("00Z0,0010\tA\tKEEP\n", MalformedPattern),
    ("tag\tkeyword\tbaseline\tRetainEverything\n", UnknownActionCode),
])
def test_rule_table_errors(text, err):
    with pytest.raises(err):
        parse_rule_table(text)


def test_shipped_table_covers_core_identifiers():
    for tag in [(0x0010, 0x0010), (0x0010, 0x0020), (0x0010, 0x0030), (0x0008, 0x0050), (0x0020, 0x000D)]:
        assert TABLE.lookup(Tag(*tag)) is not None


def test_config_parse_and_errors(tmp_path):
    cfg = parse_config("[profile]\noptions = RetainUIDs, CleanDescriptors\n[uid]\nmode = hash\n")
    assert cfg.has(OptionId.RetainUIDs) and cfg.uid_mode == "HASH"
    with pytest.raises(ConfigError):
        parse_config("[profile]\noptions = RetainLongitudinalFullDates, RetainLongitudinalModifiedDates\n")
    with pytest.raises(ConfigError):
        parse_config("[profile]\noptions = NotAnOption\n")
    with pytest.raises(ConfigError):
        parse_config("[pixels]\nUS = maybe\n")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_resolve_action_normalizes_by_vr():
    safe = load_safe_private()
    assert resolve_action(Tag(0x0008, 0x0020), "DA", False, BASE, TABLE, safe) in (Action.ZERO, Action.DUMMY)
    shift = BASE.replace(options=frozenset({OptionId.RetainLongitudinalModifiedDates}))
    assert resolve_action(Tag(0x0008, 0x0020), "DA", False, shift, TABLE, safe) is Action.TEMPORAL
    assert resolve_action(Tag(0x0009, 0x1010), "LO", True, BASE, TABLE, safe) is Action.REMOVE
    # unknown standard tags default by VR
    assert resolve_action(Tag(0x0019, 0x0000), "UL", False, BASE, TABLE, safe) is Action.REMOVE
    assert resolve_action(Tag(0x7777, 0x0001), "UI", False, BASE, TABLE, safe) is Action.REMAP_UID


def test_dummy_values_are_valid():
    from deident.dicom.validate import check_value
    for vr in ["AE", "AS", "CS", "DA", "DS", "DT", "IS", "LO", "LT", "PN", "SH", "ST", "TM", "UC", "UI", "UT"]:
        value = synthesize_dummy(vr, Tag(0x0010, 0x0010))
        assert check_value(vr, value) is None, vr
    assert synthesize_dummy("US", Tag(0x0028, 0x0010)) == b"\x00\x00"
    with pytest.raises(NoDummyForVR):
        synthesize_dummy("SQ", Tag(0x0008, 0x1140))


def test_apply_baseline():
    fo = small_file()
    before = fo.copy()
    out, audit = apply(fo, BASE, TABLE, session())
    body = out.body
    assert fo.body == before.body  # input untouched
    assert body.text((0x0010, 0x0010)).startswith("ANON")
    assert body.text((0x0010, 0x0020)) == body.text((0x0010, 0x0010))
    assert (0x0008, 0x1030) not in body
    assert body.text((0x0008, 0x0080)) == ""
    assert body.text((0x0020, 0x000D)) not in ("", "1.2.3.4.5.7")
    assert body.text((0x0008, 0x0016)) == "1.2.840.10008.5.1.4.1.1.2"
    assert body.text((0x0012, 0x0062)) == "YES"
    assert body[(0x0012, 0x0064)].is_sequence
    assert out.preamble == b"\x00" * 128
    assert out.meta.text((0x0002, 0x0003)) == body.text((0x0008, 0x0018))
    assert {r.action for r in audit} >= {Action.DUMMY, Action.REMOVE, Action.REMAP_UID}


def test_apply_options():
    cfg = BASE.replace(options=frozenset({OptionId.RetainPatientCharacteristics, OptionId.CleanDescriptors,
                                          OptionId.RetainInstitutionIdentity}))
    out, _ = apply(small_file(), cfg, TABLE, session())
    assert out.body.text((0x0010, 0x0040)) == "M"
    assert out.body.text((0x0010, 0x1010)) == "090Y"  # top-coded
    assert out.body.text((0x0008, 0x0080)) == "General Hospital"
    desc = out.body.text((0x0008, 0x1030))
    assert "Smith" not in desc and "CT head" in desc


def _private_block(block, creator, value, group=0x0009):
    return [text_element((group, block), "LO", creator), text_element((group, (block << 8) | 0x01), "LO", value)]


def test_private_elements_removed_by_default_and_safe_kept_with_option():
    safe = parse_safe_private("VENDOR X\t0009\t01\tLO\n")
    for block in (0x10, 0x43):
        fo = small_file(_private_block(block, "VENDOR X", "harmless"))
        out, _ = apply(fo, BASE, TABLE, session(), safe)
        assert not any(el.tag.is_private for _, el in iter_elements(out.body))
        cfg = BASE.replace(options=frozenset({OptionId.RetainSafePrivate}))
        out, _ = apply(fo, cfg, TABLE, session(), safe)
        assert out.body.text((0x0009, (block << 8) | 1)) == "harmless"
        assert out.body.text((0x0009, block)) == "VENDOR X"
    # unknown creator: gone even under the option
    fo = small_file(_private_block(0x10, "OTHER", "MRN998877"))
    out, _ = apply(fo, BASE.replace(options=frozenset({OptionId.RetainSafePrivate})), TABLE, session(), safe)
    assert not any(el.tag.is_private for _, el in iter_elements(out.body))


def test_nested_sequences_are_processed():
    item = DataSet([text_element((0x0010, 0x0010), "PN", "Smith^John"),
                    text_element((0x0008, 0x1155), "UI", "1.2.3.4.5.6")])
    fo = small_file([sequence_element((0x0008, 0x1140), [item])])
    out, _ = apply(fo, BASE, TABLE, session())
    new_item = out.body[(0x0008, 0x1140)].items[0]
    assert new_item.text((0x0008, 0x1155)) == out.body.text((0x0008, 0x0018))
    assert "Smith" not in new_item.text((0x0010, 0x0010), "")


def test_quarantine():
    with pytest.raises(QuarantineObject):
        apply(quarantinable_pdf(), BASE, TABLE, session())
    fo = small_file([text_element((0x0008, 0x0064), "CS", "SD")])
    with pytest.raises(QuarantineObject):
        apply(fo, BASE, TABLE, session())


def test_same_patient_same_pseudonym_across_files():
    s = session()
    a, _ = apply(small_file(), BASE, TABLE, s)
    b, _ = apply(small_file(), BASE, TABLE, s)
    assert a.body.text((0x0010, 0x0020)) == b.body.text((0x0010, 0x0020))
    assert a.body.text((0x0020, 0x000D)) == b.body.text((0x0020, 0x000D))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sets(st.sampled_from(list(OptionId)), max_size=4))
def test_engine_properties_on_generated_files(seed, options):
    options.discard(OptionId.RetainLongitudinalFullDates)
    cfg = BASE.replace(options=frozenset(options))
    sf = make_corpus_file(seed)
    out, audit = apply(sf.file, cfg, TABLE, session())
    # never introduces VR violations
    assert len(validate_vr(out.body)) <= len(validate_vr(sf.file.body))
    # private elements survive only under RetainSafePrivate and only when listed
    privates = [el for _, el in iter_elements(out.body) if el.tag.is_private and not el.tag.is_private_creator]
    if OptionId.RetainSafePrivate not in options:
        assert privates == []
    # names and MRN never survive in any text element
    text = b"".join(el.raw for _, el in iter_elements(out.body)
                    if not el.is_sequence and not el.is_encapsulated)
    assert sf.patient.mrn.encode() not in text
    assert sf.patient.family.encode() not in text
    assert audit
