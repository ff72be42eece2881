"""Batch orchestration: files in, de-identified tree plus reports out."""

from __future__ import annotations

import csv
import hashlib
import io
import logging
import os
import shutil
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .dicom.dataset import DataSet, Element, FileObject, encode_text, numeric_element
from .dicom.errors import DicomError, UnsupportedTransferSyntax
from .dicom.parser import parse_file
from .dicom.tag import Tag
from .dicom.validate import check_value, validate_vr
from .dicom.vr import VR_SPECS
from .dicom.writer import serialize
from .evaluate import EvalReport, derive_expectations, evaluate_pair, expectation_index
from .pixels.container import UnsupportedPixelEncoding, redact_pixels, sanitize_container
from .pixels.jpeg import MalformedJpeg
from .pixels.templates import load_templates, match_template, matching_templates
from .qc import dataset_phrases, format_pool
from .remap import RemapSession
from .risk.hierarchy import hierarchies_for, parse_hierarchy_spec
from .risk.measures import RiskReport, as_fraction, risk_report
from .risk.recode import Infeasible, recode_to_threshold
from .risk.report import QISpec, extract_quasi_table, load_qi_spec
from .risk.table import MISSING, QuasiTable, load_table
from .rules.actions import Action
from .rules.config import ProfileConfig, load_config
from .rules.engine import AuditRecord, apply, patient_key_of
from .rules.errors import ConfigError, QuarantineObject
from .rules.private import load_safe_private
from .rules.table import load_rule_table
from .temporal import load_pair_table
from .textscan import IdentifierIndex

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILURES, EXIT_RISK, EXIT_CONFIG = 0, 1, 2, 3

STUDY_UID, SERIES_UID, SOP_UID = Tag(0x0020, 0x000D), Tag(0x0020, 0x000E), Tag(0x0008, 0x0018)
MODALITY, SOP_CLASS = Tag(0x0008, 0x0060), Tag(0x0008, 0x0016)

RESTRICTED_README = """RESTRICTED: this directory re-identifies the de-identified collection.

It holds the audit log, the full manifest (original file paths) and, unless
the run used --discard-map, the session key with the UID, pseudonym and date
offset maps. Store it apart from the released data, with access limited to
the honest broker. Never ship it with the collection.
"""


@dataclass
class RunConfig:
    input_root: Path
    output_root: Path
    config_path: Path | None = None
    rules_path: Path | None = None
    templates_path: Path | None = None
    qi_spec_path: Path | None = None
    threshold: Fraction = Fraction(9, 100)
    max_suppression: Fraction = Fraction(0)
    registry_path: Path | None = None
    auto_recode: bool = False
    evaluate: bool = False
    workers: int = 1
    dry_run: bool = False
    fail_fast: bool = False
    discard_map: bool = False
    quarantine_root: Path | None = None
    session_dir: Path | None = None
    secret: bytes | None = None
    planted_tokens: tuple = ()
    figures: bool = True

    def __post_init__(self):
        self.input_root = Path(self.input_root)
        self.output_root = Path(self.output_root)
        if self.quarantine_root is None:
            self.quarantine_root = self.output_root.with_name(self.output_root.name + ".quarantine")
        self.threshold = as_fraction(self.threshold)
        self.max_suppression = as_fraction(self.max_suppression)

    def check(self) -> None:
        if not self.input_root.is_dir():
            raise ConfigError(f"input root {self.input_root} is not a directory")
        a, b = self.input_root.resolve(), self.output_root.resolve()
        if a == b or a in b.parents or b in a.parents:
            raise ConfigError("input and output roots must be disjoint")
        for p in (self.config_path, self.rules_path, self.templates_path, self.qi_spec_path,
                  self.registry_path, self.session_dir):
            if p is not None and not Path(p).exists():
                raise ConfigError(f"{p} does not exist")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if not 0 < self.threshold <= 1:
            raise ConfigError("threshold must lie in (0, 1]")


@dataclass
class ManifestRow:
    input_key: str  # digest of the original relative path
    original: str  # restricted only
    output: str
    pseudonym: str
    status: str  # ok | quarantined | failed
    error: str = ""


@dataclass
class TaskResult:
    row: ManifestRow
    audit: list = field(default_factory=list)
    evaluation: EvalReport | None = None
    phrases: Counter = field(default_factory=Counter)
    subject: str = ""
    output_body: DataSet | None = None


@dataclass
class BatchResult:
    exit_code: int
    manifest: list[ManifestRow]
    evaluation: EvalReport | None = None
    risk: RiskReport | None = None
    risk_passed: bool = True
    qc: list = field(default_factory=list)

    def counts(self) -> Counter:
        return Counter(r.status for r in self.manifest)


def input_key(rel: str) -> str:
    return hashlib.sha256(rel.encode("utf-8", "surrogateescape")).hexdigest()[:16]


def list_inputs(root: Path) -> list[Path]:
    return sorted(p for p in root.rglob("*") if p.is_file())


class _Context:
    """Everything a task reads; immutable apart from the shared session."""

    def __init__(self, rc: RunConfig, session: RemapSession):
        self.rc = rc
        self.config: ProfileConfig = load_config(rc.config_path)
        self.table = load_rule_table(rc.rules_path)
        self.templates = load_templates(rc.templates_path)
        self.safe = load_safe_private()
        self.pairs = load_pair_table()
        self.session = session
        self.expectations = expectation_index(derive_expectations(self.table, self.config)) if rc.evaluate else None
        self.stop = threading.Event()


def _output_rel(body: DataSet, pseudonym: str) -> str:
    parts = [body.text(STUDY_UID) or "nostudy", body.text(SERIES_UID) or "noseries", body.text(SOP_UID) or "nosop"]
    return "/".join(["data", pseudonym] + parts[:2]) + f"/{parts[2]}.dcm"


def _process(ctx: _Context, path: Path) -> TaskResult:
    rc = ctx.rc
    rel = path.relative_to(rc.input_root).as_posix()
    key = input_key(rel)
    row = ManifestRow(key, rel, "", "", "failed")
    result = TaskResult(row)
    if ctx.stop.is_set():
        row.error = "Skipped"
        return result
    try:
        data = path.read_bytes()
        original = parse_file(data)
        patient = patient_key_of(original.body)
        row.pseudonym = ctx.session.pseudonym(patient)
        result.subject = row.pseudonym
        clean = sanitize_container(original)
        out, audit = apply(clean, ctx.config, ctx.table, ctx.session, ctx.safe, ctx.pairs)
        result.audit = audit

        redacted = False
        hits = matching_templates(original.body, ctx.templates)
        regions = match_template(original.body, ctx.templates)
        if regions:
            out, note = redact_pixels(out, regions, hits[0].fill)
            redacted = True
            audit.append(AuditRecord((Tag(0x7FE0, 0x0010),), Tag(0x7FE0, 0x0010), Action.KEEP,
                                     "pixel-template:" + ",".join(t.name for t in hits), True, note))
        elif out.body.get(Tag(0x7FE0, 0x0010)) is not None:
            fallback = ctx.config.fallback_for(original.body.text(MODALITY), original.body.text(SOP_CLASS))
            if fallback == "quarantine":
                raise QuarantineObject("no burned-in text template matches")
            if fallback == "reject":
                raise UnsupportedPixelEncoding("no burned-in text template matches (reject)")

        encoded = serialize(out)
        row.output = _output_rel(out.body, row.pseudonym)
        row.status = "ok"
        result.output_body = out.body
        result.phrases = dataset_phrases(out.body)
        if ctx.expectations is not None:
            index = IdentifierIndex.build(original.body, ctx.config.min_token_len)
            planted = tuple(rc.planted_tokens) or tuple(
                t for t in index.ids | index.person_names if len(t) >= 6)
            result.evaluation = evaluate_pair(original, out, ctx.expectations, index, ctx.config, ctx.safe,
                                              planted, key, output_bytes=encoded,
                                              pixels_redacted=redacted)
        if not rc.dry_run:
            target = rc.output_root / row.output
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(encoded)
    except (QuarantineObject, MalformedJpeg, UnsupportedPixelEncoding) as exc:
        row.status = "quarantined"
        row.error = f"{type(exc).__name__}: {exc}"
        row.output = f"{key}.dcm"
        if not rc.dry_run:
            rc.quarantine_root.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(path, rc.quarantine_root / row.output)
    except UnsupportedTransferSyntax as exc:
        row.status = "quarantined"
        row.error = f"{type(exc).__name__}: {exc}"
        row.output = f"{key}.dcm"
        if not rc.dry_run:
            rc.quarantine_root.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(path, rc.quarantine_root / row.output)
    except DicomError as exc:
        row.status = "failed"
        row.error = type(exc).__name__
    except Exception as exc:  # per-file failures never abort the batch
        log.exception("failed on %s", key)
        row.status = "failed"
        row.error = type(exc).__name__
    if row.status == "failed" and rc.fail_fast:
        ctx.stop.set()
    return result


def _write_tsv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def _write_restricted(rc: RunConfig, session: RemapSession, results: list[TaskResult]) -> None:
    d = rc.output_root / "restricted"
    d.mkdir(parents=True, exist_ok=True)
    (d / "README.txt").write_text(RESTRICTED_README)
    _write_tsv(d / "manifest_full.tsv", ["input_key", "original", "output", "pseudonym", "status", "error"],
               [[r.row.input_key, r.row.original, r.row.output, r.row.pseudonym, r.row.status, r.row.error]
                for r in results])
    audit_rows = []
    for r in results:
        for a in r.audit:
            audit_rows.append([r.row.input_key] + a.row())
    _write_tsv(d / "audit.tsv", ["input_key", "path", "tag", "action", "reason", "changed", "note"], audit_rows)
    if not rc.discard_map:
        session.save(d / "session")
    os.chmod(d, 0o700)


# -- risk gate ---------------------------------------------------------------------

def _qi_setup(rc: RunConfig):
    specs = load_qi_spec(rc.qi_spec_path)
    hier = {s.name: parse_hierarchy_spec(s.kind, s.hierarchy) for s in specs}
    return specs, hier


def risk_gate(table: QuasiTable, threshold, hierarchies=None, population: QuasiTable | None = None,
              levels=None) -> tuple[bool, RiskReport]:
    """Prosecutor max risk against the threshold; an empty QI set passes vacuously."""
    threshold = as_fraction(threshold)
    hs = hierarchies_for(table, hierarchies) if not isinstance(hierarchies, list) else hierarchies
    if not table.columns or not table.rows:
        report = RiskReport(k_min=len(table.rows), class_sizes={len(table.rows): 1} if table.rows else {},
                            max_risk=Fraction(0), avg_risk=Fraction(0), retained_rows=len(table.rows))
        report.warnings.append("no quasi-identifiers retained; gate passes vacuously")
        return True, report
    report = risk_report(table, levels, hs, (), population)
    return report.max_risk <= threshold, report


def _encode_generalized(el: Element, value) -> Element | None:
    """Replacement element for a recoded value; None means empty it."""
    if value is MISSING or value == "*":
        return None
    vr = el.vr
    if vr == "AS":
        text = f"{int(value):03d}Y"
    elif VR_SPECS[vr].kind == "binary":
        return numeric_element(el.tag, vr, [value])
    else:
        text = str(value)
    if check_value(vr, text) is not None:
        return None
    return Element(el.tag, vr, encode_text(vr, text))


def _apply_recoding(rc: RunConfig, results: list[TaskResult], specs: list[QISpec], hier: dict,
                    levels: dict, suppressed_subjects: set) -> None:
    for r in results:
        body = r.output_body
        if body is None:
            continue
        changed = False
        for spec in specs:
            if spec.tag is None:
                continue
            el = body.get(spec.tag)
            if el is None or el.is_empty or el.is_sequence:
                continue
            level = levels.get(spec.name, 0)
            if level == 0 and r.subject not in suppressed_subjects:
                continue
            h = hier[spec.name]
            row_value = _qi_value(body, spec)
            if r.subject in suppressed_subjects or level >= h.top:
                new = None
            elif spec.kind == "NUMERIC":
                new = _encode_generalized(el, h.lower_bound(row_value, level))
            else:
                new = _encode_generalized(el, h.generalize(row_value, level))
            body[spec.tag] = new if new is not None else Element(el.tag, el.vr, b"")
            changed = True
            r.audit.append(AuditRecord((spec.tag,), spec.tag, Action.ZERO if new is None else Action.KEEP,
                                       "risk-recode", True, f"{spec.name} level {level}"))
        if changed and not rc.dry_run and r.row.status == "ok":
            target = rc.output_root / r.row.output
            fo = parse_file(target.read_bytes())
            fo.body = body
            target.write_bytes(serialize(fo))


def _qi_value(body: DataSet, spec: QISpec):
    return extract_quasi_table([("x", body)], [spec]).rows[0][0]


# -- reports -----------------------------------------------------------------------

def _write_reports(rc: RunConfig, result: BatchResult, results: list[TaskResult], config: ProfileConfig) -> None:
    reports = rc.output_root / "reports"
    reports.mkdir(parents=True, exist_ok=True)
    _write_tsv(rc.output_root / "manifest.tsv", ["input_key", "output", "pseudonym", "status", "error"],
               [[m.input_key, m.output, m.pseudonym, m.status, m.error] for m in result.manifest])
    (reports / "qc_pool.txt").write_text(format_pool(result.qc))
    counts = result.counts()
    summary = [f"files\t{len(result.manifest)}"] + [f"{k}\t{counts.get(k, 0)}" for k in ("ok", "quarantined", "failed")]
    summary.append(f"exit_code\t{result.exit_code}")
    summary.append(f"# ages above {config.age_topcode_years}Y are written as "
                   f"{config.age_topcode_years + 1:03d}Y, meaning that age or older")
    (reports / "summary.txt").write_text("\n".join(summary) + "\n")
    if result.evaluation is not None:
        (reports / "eval_report.txt").write_text(result.evaluation.to_text(public=True))
        (rc.output_root / "restricted" / "eval_exemplars.txt").write_text(result.evaluation.to_text())
    if result.risk is not None:
        text = result.risk.to_text() + f"threshold\t{rc.threshold}\npassed\t{result.risk_passed}\n"
        (reports / "risk_report.txt").write_text(text)
    if rc.figures:
        from . import plots
        plots.qc_figure(result.qc, reports / "qc_pool.png")
        if result.evaluation is not None:
            plots.eval_figure(result.evaluation, reports / "eval_report.png")
        if result.risk is not None:
            plots.risk_figure(result.risk, rc.threshold, reports / "risk_report.png")


def run_batch(rc: RunConfig) -> BatchResult:
    rc.check()
    if rc.session_dir is not None:
        session = RemapSession.load(rc.session_dir)
    else:
        config = load_config(rc.config_path)
        session = RemapSession("collection", config.uid_mode, config.uid_root, config.uid_salt,
                               rc.secret, config.pseudonym_prefix)
    ctx = _Context(rc, session)
    inputs = list_inputs(rc.input_root)
    if rc.workers == 1:
        results = [_process(ctx, p) for p in inputs]
    else:
        with ThreadPoolExecutor(max_workers=rc.workers) as pool:
            results = list(pool.map(lambda p: _process(ctx, p), inputs))

    manifest = [r.row for r in results]
    evaluation = None
    if rc.evaluate:
        evaluation = EvalReport()
        for r in results:
            if r.evaluation is not None:
                evaluation = evaluation.merge(r.evaluation)
    qc_counter: Counter = Counter()
    for r in results:
        qc_counter.update(r.phrases)
    batch = BatchResult(EXIT_OK, manifest, evaluation, qc=[(n, p) for p, n in sorted(qc_counter.items())])

    if rc.qi_spec_path is not None:
        specs, hier = _qi_setup(rc)
        pairs = [(r.subject, r.output_body) for r in results if r.output_body is not None]
        table = extract_quasi_table(pairs, specs)
        population = load_table(rc.registry_path) if rc.registry_path else None
        hs = hierarchies_for(table, hier)
        passed, report = risk_gate(table, rc.threshold, hs, population)
        if not passed and rc.auto_recode:
            try:
                levels, suppressed, _ = recode_to_threshold(table, hs, rc.threshold, rc.max_suppression)
            except Infeasible as exc:
                report.warnings.append(str(exc))
            else:
                subjects = {table.subjects[i] for i in suppressed}
                _apply_recoding(rc, results, specs, hier, levels, subjects)
                table = extract_quasi_table(
                    [(r.subject, r.output_body) for r in results if r.output_body is not None], specs)
                table_levels = [levels[c.name] for c in table.columns]
                sup_rows = {i for i, s in enumerate(table.subjects) if s in subjects}
                report = risk_report(table, table_levels, hs, sup_rows, population)
                passed = report.max_risk <= rc.threshold
                report.warnings.append("recoded to meet the threshold")
        batch.risk, batch.risk_passed = report, passed

    if any(m.status == "failed" for m in manifest):
        batch.exit_code = EXIT_FAILURES
    if not batch.risk_passed:
        batch.exit_code = EXIT_RISK
    rc.output_root.mkdir(parents=True, exist_ok=True)
    _write_restricted(rc, session, results)
    _write_reports(rc, batch, results, ctx.config)
    return batch


def validate_tree(root: Path) -> list[tuple[str, list]]:
    """VR violations per DICOM file under ``root`` (files that fail to parse are reported too)."""
    out = []
    for p in list_inputs(Path(root)):
        rel = p.relative_to(root).as_posix()
        try:
            fo = parse_file(p.read_bytes())
        except DicomError as exc:
            out.append((rel, [f"unparseable: {type(exc).__name__}"]))
            continue
        out.append((rel, validate_vr(fo.body)))
    return out


def pool_tree(root: Path) -> list[tuple[int, str]]:
    counter: Counter = Counter()
    for p in list_inputs(Path(root)):
        try:
            counter.update(dataset_phrases(parse_file(p.read_bytes()).body))
        except DicomError:
            continue
    return [(n, p) for p, n in sorted(counter.items())]
