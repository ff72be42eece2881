from fractions import Fraction

import pytest

from deident.cli import main
from deident.dicom import syntax
from deident.dicom.parser import parse_file
from deident.dicom.writer import serialize
from deident.pipeline import EXIT_CONFIG, EXIT_FAILURES, EXIT_OK, EXIT_RISK, RunConfig, risk_gate, run_batch
from deident.risk import Column, QuasiTable
from deident.rules.errors import ConfigError
from deident.synthetic import make_corpus_file, make_us_file, quarantinable_pdf, write_corpus


@pytest.fixture
def small_in(tmp_path):
    files = [make_corpus_file(i) for i in range(12)]
    write_corpus(files, tmp_path / "in")
    return tmp_path / "in", files


def outputs(root):
    return sorted(p for p in (root / "data").rglob("*.dcm"))


def test_run_writes_tree_manifest_and_restricted(small_in, tmp_path):
    src, files = small_in
    res = run_batch(RunConfig(src, tmp_path / "out", evaluate=True, secret=b"p" * 32))
    assert res.exit_code == EXIT_OK and res.counts()["ok"] == 12
    outs = outputs(tmp_path / "out")
    assert len(outs) == 12
    manifest = (tmp_path / "out" / "manifest.tsv").read_text()
    for sf in files:
        assert sf.patient.mrn not in manifest and sf.patient.family not in manifest
    restricted = tmp_path / "out" / "restricted"
    assert (restricted / "README.txt").exists() and (restricted / "session" / "session.key").exists()
    assert files[0].name in (restricted / "manifest_full.tsv").read_text()
    for p in outs:
        rel = p.relative_to(tmp_path / "out" / "data").parts
        assert rel[0].startswith("ANON") and len(rel) == 4
        fo = parse_file(p.read_bytes())
        assert serialize(fo) == p.read_bytes()
    for name in ("eval_report.txt", "qc_pool.txt", "summary.txt", "qc_pool.png", "eval_report.png"):
        assert (tmp_path / "out" / "reports" / name).exists()
    assert res.evaluation.ok


def test_quarantine_and_failures(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    (src / "pdf.dcm").write_bytes(serialize(quarantinable_pdf()))
    (src / "us_unmatched.dcm").write_bytes(serialize(make_us_file(False)))
    (src / "garbage.bin").write_bytes(b"not dicom at all" * 20)
    rle = make_corpus_file(0)
    (src / "ok.dcm").write_bytes(rle.encode())
    res = run_batch(RunConfig(src, tmp_path / "out", secret=b"p" * 32))
    status = {m.original: m.status for m in res.manifest}
    assert status == {"pdf.dcm": "quarantined", "us_unmatched.dcm": "quarantined", "garbage.bin": "failed",
                      "ok.dcm": "ok"}
    assert res.exit_code == EXIT_FAILURES
    q = tmp_path / "out.quarantine"
    assert len(list(q.iterdir())) == 2
    assert len(outputs(tmp_path / "out")) == 1


def test_fail_fast_skips_the_rest(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    (src / "a_garbage.bin").write_bytes(b"x" * 300)
    (src / "b.dcm").write_bytes(make_corpus_file(1).encode())
    res = run_batch(RunConfig(src, tmp_path / "out", fail_fast=True))
    assert [m.status for m in res.manifest] == ["failed", "failed"]
    assert res.manifest[1].error == "Skipped"


def test_dry_run_and_discard_map(small_in, tmp_path):
    src, _ = small_in
    res = run_batch(RunConfig(src, tmp_path / "out", dry_run=True, discard_map=True))
    assert res.counts()["ok"] == 12
    assert not (tmp_path / "out" / "data").exists()
    assert not (tmp_path / "out" / "restricted" / "session").exists()


def test_session_reuse_gives_same_outputs(small_in, tmp_path):
    src, _ = small_in
    run_batch(RunConfig(src, tmp_path / "a"))
    run_batch(RunConfig(src, tmp_path / "b", session_dir=tmp_path / "a" / "restricted" / "session"))
    a, b = outputs(tmp_path / "a"), outputs(tmp_path / "b")
    assert [p.relative_to(tmp_path / "a") for p in a] == [p.relative_to(tmp_path / "b") for p in b]
    assert all(x.read_bytes() == y.read_bytes() for x, y in zip(a, b))


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig(tmp_path / "nope", tmp_path / "out").check()
    (tmp_path / "in").mkdir()
    with pytest.raises(ConfigError):
        RunConfig(tmp_path / "in", tmp_path / "in" / "out").check()
    bad = tmp_path / "bad.ini"
    bad.write_text("[profile]\noptions = Nope\n")
    assert main(["run", "--in", str(tmp_path / "in"), "--out", str(tmp_path / "o"), "--config", str(bad)]) \
        == EXIT_CONFIG
    assert main(["run", "--in", str(tmp_path / "missing"), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_risk_gate_vacuous_and_failing():
    ok, rep = risk_gate(QuasiTable([], [(), ()]), 0.09)
    assert ok and rep.warnings
    ok, rep = risk_gate(QuasiTable([Column("sex")], [("F",)] * 5 + [("M",)] * 20), 0.09)
    assert not ok and rep.max_risk == Fraction(1, 5)


QI = "age\tNUMERIC\ttag:0010,1010\twidths=10,50\nsex\tCATEGORICAL\ttag:0010,0040\t\n"
RETAIN = "[profile]\noptions = RetainPatientCharacteristics\n"


def test_risk_gate_in_run_with_auto_recode(tmp_path):
    files = [make_corpus_file(i, transfer_syntax=syntax.EXPLICIT_LE, modality="CT") for i in range(60)]
    write_corpus(files, tmp_path / "in")
    (tmp_path / "qi.tsv").write_text(QI)
    (tmp_path / "p.ini").write_text(RETAIN)
    base = dict(config_path=tmp_path / "p.ini", qi_spec_path=tmp_path / "qi.tsv", secret=b"r" * 32)
    res = run_batch(RunConfig(tmp_path / "in", tmp_path / "o1", **base))
    assert res.exit_code == EXIT_RISK and not res.risk_passed
    res = run_batch(RunConfig(tmp_path / "in", tmp_path / "o2", auto_recode=True, max_suppression=0.5, **base))
    assert res.risk_passed and res.exit_code == EXIT_OK
    assert res.risk.max_risk <= Fraction(9, 100)
    ages = {parse_file(p.read_bytes()).body.text((0x0010, 0x1010)) for p in outputs(tmp_path / "o2")}
    assert ages <= {"", "000Y", "050Y", "010Y", "020Y", "030Y", "040Y", "060Y", "070Y", "080Y", "090Y"}
    assert (tmp_path / "o2" / "reports" / "risk_report.png").exists()


def test_cli_subcommands(tmp_path, capsys, small_in):
    src, _ = small_in
    table = tmp_path / "t.tsv"
    table.write_text("subject\tsex\n" + "".join(f"s{i}\t{'F' if i % 2 else 'M'}\n" for i in range(30)))
    assert main(["risk", "--table", str(table), "--threshold", "0.09"]) == EXIT_OK
    assert "max_risk\t1/15" in capsys.readouterr().out
    assert main(["risk", "--table", str(table), "--threshold", "0.05"]) == EXIT_RISK
    assert main(["validate", "--in", str(src)]) in (EXIT_OK, EXIT_FAILURES)
    assert main(["qc-pool", "--in", str(src)]) == EXIT_OK
    assert main(["run", "--in", str(src), "--out", str(tmp_path / "o"), "--workers", "3", "--evaluate"]) == EXIT_OK
    assert main(["validate", "--in", str(tmp_path / "o" / "data")]) == EXIT_OK
