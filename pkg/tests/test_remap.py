import threading

import pytest
from hypothesis import given, settings, strategies as st

from deident.dicom.validate import is_valid_uid
from deident.remap import RemapSession, RootTooLong, SessionClosed, hash_uid

uids = st.lists(st.integers(0, 10 ** 12), min_size=2, max_size=8).map(lambda xs: "1." + ".".join(map(str, xs)))


@settings(max_examples=200)
@given(st.lists(uids, min_size=1, max_size=30))
def test_map_mode_is_a_consistent_injection(values):
    s = RemapSession(secret=b"k" * 32)
    first = {u: s.remap(u) for u in values}
    assert all(s.remap(u) == first[u] for u in values)
    assert len(set(first.values())) == len(first)
    for u, n in first.items():
        assert is_valid_uid(n) and n != u and n.startswith("2.25.")


@given(uids)
def test_order_independence(u):
    a = RemapSession(secret=b"k" * 32)
    b = RemapSession(secret=b"k" * 32)
    a.remap("1.2.3")
    assert a.remap(u) == b.remap(u) or u == "1.2.3"


def test_hash_mode_reproducible_and_salted():
    assert hash_uid("1.2.3", "2.25", b"salt") == hash_uid("1.2.3", "2.25", b"salt")
    assert hash_uid("1.2.3", "2.25", b"salt") != hash_uid("1.2.3", "2.25", b"pepper")
    a = RemapSession(mode="HASH", salt=b"x")
    b = RemapSession(mode="HASH", salt=b"x")
    assert a.remap("1.2.840.1") == b.remap("1.2.840.1")


def test_multi_valued_and_invalid_inputs():
    s = RemapSession(secret=b"k" * 32)
    out = s.remap_value("1.2.3\\1.2.4")
    a, b = out.split("\\")
    assert a == s.remap("1.2.3") and b == s.remap("1.2.4")
    bad = s.remap("1.02..x")
    assert is_valid_uid(bad) and s.invalid_inputs == ["1.02..x"]


def test_root_checks():
    with pytest.raises(RootTooLong):
        RemapSession(root="1." + "2" * 60)
    with pytest.raises(RootTooLong):
        RemapSession(root="not.a.uid")
    long_root = "1.2." + "3" * 40
    assert len(RemapSession(root=long_root).remap("1.2.3")) <= 64


def test_save_load_and_close(tmp_path):
    s = RemapSession(secret=b"k" * 32)
    u, p, o = s.remap("1.2.3"), s.pseudonym("MRN1"), s.offset("MRN1")
    s.save(tmp_path)
    assert (tmp_path / "session.key").stat().st_mode & 0o077 == 0
    t = RemapSession.load(tmp_path)
    assert (t.remap("1.2.3"), t.pseudonym("MRN1"), t.offset("MRN1")) == (u, p, o)
    assert "MRN1" not in (tmp_path / "pseudonyms.tsv").read_text()
    t.close()
    with pytest.raises(SessionClosed):
        t.remap("1.2.4")


def test_offsets_within_range_and_stable():
    s = RemapSession(secret=b"k" * 32)
    for i in range(200):
        o = s.offset(f"P{i}", (-30, -5), with_seconds=True)
        assert -30 <= o.days <= -5 and 0 <= o.seconds < 86400
        assert s.offset(f"P{i}") == o


def test_threaded_lookups_agree():
    s = RemapSession(secret=b"k" * 32)
    results = []

    def work():
        results.append(tuple(s.remap(f"1.2.{i}") for i in range(300)))

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(results)) == 1
