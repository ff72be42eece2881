from hypothesis import given, strategies as st

from deident.dicom.dataset import DataSet, text_element
from deident.textscan import DROP, REDACTION_MARKER, IdentifierIndex, clean_text, name_permutations, scan_text


def index():
    ds = DataSet([text_element((0x0010, 0x0010), "PN", "Smith^John^Quincy"),
                  text_element((0x0010, 0x0020), "LO", "MRN4455"),
                  text_element((0x0008, 0x0050), "SH", "ACC77")])
    return IdentifierIndex.build(ds)


def test_name_permutations():
    perms = name_permutations("Smith^John^Quincy")
    assert {"John Smith", "Smith, John", "J. Smith", "John Quincy Smith"} <= perms


def test_index_echoes_and_patterns():
    idx = index()
    text = "Seen by dr for John Smith (mrn4455) on 2020-03-04, call 555-123-4567 or js@example.org"
    kinds = {f.kind for f in scan_text(text, idx)}
    assert len(kinds) >= 4
    cleaned = clean_text(text, scan_text(text, idx))
    for token in ("John Smith", "mrn4455", "2020-03-04", "555-123-4567", "js@example.org"):
        assert token not in cleaned
    assert "Seen by dr for" in cleaned


def test_allowlist_and_drop_mode():
    idx = index()
    assert scan_text("Smith-Lemli syndrome", idx, {"Smith-Lemli"}) == []
    assert scan_text("Smith-Lemli Smith", idx, {"Smith-Lemli"})
    assert clean_text("ACC77", scan_text("ACC77", idx), "DROP_VALUE") is DROP
    assert clean_text("nothing here", [], "DROP_VALUE") == "nothing here"


@given(st.text(alphabet="abcdefghij klmnop0123456789-/@.", max_size=80))
def test_cleaning_is_idempotent(text):
    idx = index()
    once = clean_text(text, scan_text(text, idx))
    assert clean_text(once, scan_text(once, idx)) == once


@given(st.text(alphabet="abc xyz", max_size=30), st.text(alphabet="abc xyz", max_size=30))
def test_planted_identifier_is_always_removed(a, b):
    idx = index()
    text = a + "MRN4455" + b
    assert "mrn4455" not in clean_text(text, scan_text(text, idx)).lower()
    assert REDACTION_MARKER in clean_text(text, scan_text(text, idx))
