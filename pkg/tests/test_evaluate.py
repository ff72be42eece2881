from deident.dicom.dataset import text_element
from deident.dicom.tag import Tag
from deident.dicom.writer import serialize
from deident.evaluate import (CONFORMANCE, PRIVATE, RESIDUAL, EvalReport, derive_expectations, evaluate_pair,
                              expectation_index)
from deident.remap import RemapSession
from deident.rules import OptionId, apply, load_config, load_rule_table
from deident.rules.private import load_safe_private
from deident.synthetic import make_corpus_file
from deident.textscan import IdentifierIndex

TABLE = load_rule_table()


def run(cfg, index=3):
    sf = make_corpus_file(index)
    out, _ = apply(sf.file, cfg, TABLE, RemapSession(secret=b"e" * 32))
    idx = expectation_index(derive_expectations(TABLE, cfg))
    return sf, out, idx


def test_clean_output_passes_under_several_profiles():
    for options in [(), (OptionId.RetainLongitudinalModifiedDates, OptionId.CleanDescriptors),
                    (OptionId.RetainSafePrivate, OptionId.RetainPatientCharacteristics)]:
        cfg = load_config().replace(options=frozenset(options))
        for i in range(8):
            sf, out, idx = run(cfg, i)
            if sf.file.transfer_syntax.endswith(".4.50"):
                continue  # JPEG marker segments are the pipeline's job
            # kept descriptors can only be cleaned of known identifiers, not arbitrary words
            planted = sf.tokens if OptionId.CleanDescriptors not in options else [sf.patient.mrn, sf.patient.family]
            rep = evaluate_pair(sf.file, out, idx, IdentifierIndex.build(sf.file.body), cfg, load_safe_private(),
                                planted, f"f{i}")
            assert rep.ok, rep.to_text()


def test_sabotage_is_flagged():
    cfg = load_config()
    sf, out, idx = run(cfg, 1)
    bad = out.copy()
    bad.body[Tag(0x0008, 0x0020)] = text_element((0x0008, 0x0020), "DA", "DEIDENTIFIED")
    bad.body.add(text_element((0x0011, 0x0010), "LO", "SNEAKY"))
    bad.body.add(text_element((0x0011, 0x1001), "LO", sf.patient.mrn))
    rep = evaluate_pair(sf.file, bad, idx, None, cfg, load_safe_private(), [sf.patient.mrn], "bad")
    assert {CONFORMANCE, PRIVATE, RESIDUAL} <= rep.failure_categories
    assert len(rep.failure_categories) >= 2


def test_untouched_output_fails_badly():
    cfg = load_config()
    sf, _, idx = run(cfg, 2)
    rep = evaluate_pair(sf.file, sf.file, idx, None, cfg, load_safe_private(), sf.tokens, "raw")
    assert rep.failure_count > 20


def test_report_merge_and_public_text():
    a, b = EvalReport(files=1), EvalReport(files=1)
    a.tally("X", True)
    b.tally("X", False, "f", (), None, "secret value MRN1")
    m = a.merge(b)
    assert m.counts["X"] == (1, 1) and m.files == 2 and m.failure_count == 1
    assert "MRN1" in m.to_text() and "MRN1" not in m.to_text(public=True)


def test_suspicious_strings_are_counted_not_failed():
    cfg = load_config().replace(options=frozenset({OptionId.CleanDescriptors}))
    sf, out, idx = run(cfg, 5)
    out.body[Tag(0x0008, 0x1030)] = text_element((0x0008, 0x1030), "LO", "call 555-123-4567")
    rep = evaluate_pair(sf.file, out, idx, None, cfg, load_safe_private(), (), "s",
                        output_bytes=serialize(out))
    assert rep.suspicious
