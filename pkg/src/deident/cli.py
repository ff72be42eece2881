"""Command line entry point: ``deident run|risk|validate|qc-pool``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .pipeline import EXIT_CONFIG, EXIT_FAILURES, EXIT_OK, EXIT_RISK, RunConfig, pool_tree, risk_gate, run_batch, \
    validate_tree
from .pixels.templates import TemplateError
from .qc import format_pool
from .risk.hierarchy import HierarchyError, hierarchies_for, load_hierarchies
from .risk.measures import as_fraction, risk_report
from .risk.recode import Infeasible, recode_to_threshold
from .risk.table import SchemaMismatch, load_table
from .rules.errors import RuleError

CONFIG_ERRORS = (RuleError, TemplateError, HierarchyError, SchemaMismatch, FileNotFoundError)


def _threshold(text: str):
    try:
        value = as_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad threshold {text!r}") from None
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError("threshold must lie in (0, 1]")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="deident", description="De-identify DICOM collections.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="de-identify a directory tree")
    run.add_argument("--in", dest="input", required=True, type=Path)
    run.add_argument("--out", dest="output", required=True, type=Path)
    run.add_argument("--config", type=Path, help="profile INI file (default: built-in profile)")
    run.add_argument("--rules", type=Path, help="rule table TSV (default: built-in table)")
    run.add_argument("--templates", type=Path, help="burned-in text templates TSV")
    run.add_argument("--qi-spec", type=Path, help="quasi-identifier spec; enables the risk gate")
    run.add_argument("--threshold", type=_threshold, default=as_fraction("0.09"))
    run.add_argument("--max-suppression", type=_threshold, default=None)
    run.add_argument("--registry", type=Path, help="population table for journalist risk")
    run.add_argument("--auto-recode", action="store_true")
    run.add_argument("--evaluate", action="store_true")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--dry-run", action="store_true")
    run.add_argument("--fail-fast", action="store_true")
    run.add_argument("--discard-map", action="store_true", help="do not persist the session key and maps")
    run.add_argument("--session", type=Path, help="reuse a saved session directory")
    run.add_argument("--quarantine", type=Path, help="quarantine directory (default: <out>.quarantine)")
    run.add_argument("--no-figures", action="store_true")

    risk = sub.add_parser("risk", help="risk report for a quasi-identifier table")
    risk.add_argument("--table", required=True, type=Path)
    risk.add_argument("--hierarchies", type=Path)
    risk.add_argument("--threshold", type=_threshold, default=as_fraction("0.09"))
    risk.add_argument("--registry", type=Path)
    risk.add_argument("--recode", action="store_true", help="search for the cheapest passing recoding")

    val = sub.add_parser("validate", help="report VR violations")
    val.add_argument("--in", dest="input", required=True, type=Path)

    qc = sub.add_parser("qc-pool", help="phrase frequencies across text values")
    qc.add_argument("--in", dest="input", required=True, type=Path)
    return ap


def _run(args) -> int:
    rc = RunConfig(args.input, args.output, args.config, args.rules, args.templates, args.qi_spec,
                   args.threshold, args.max_suppression or 0, args.registry, args.auto_recode, args.evaluate,
                   args.workers, args.dry_run, args.fail_fast, args.discard_map, args.quarantine, args.session,
                   figures=not args.no_figures)
    result = run_batch(rc)
    counts = result.counts()
    print(f"files {len(result.manifest)}: ok {counts['ok']}, quarantined {counts['quarantined']}, "
          f"failed {counts['failed']}")
    if result.evaluation is not None:
        print(f"evaluation: {result.evaluation.failure_count} failures in {result.evaluation.checked} checks")
    if result.risk is not None:
        print(f"risk: max {result.risk.max_risk} ({'pass' if result.risk_passed else 'FAIL'})")
    return result.exit_code


def _risk(args) -> int:
    table = load_table(args.table)
    hier = hierarchies_for(table, load_hierarchies(args.hierarchies) if args.hierarchies else None)
    population = load_table(args.registry) if args.registry else None
    if args.recode:
        try:
            levels, suppressed, report = recode_to_threshold(table, hier, args.threshold)
        except Infeasible as exc:
            print(exc, file=sys.stderr)
            return EXIT_RISK
        if population is not None:
            report = risk_report(table, [levels[c.name] for c in table.columns], hier, suppressed, population)
        print(report.to_text(), end="")
        return EXIT_OK
    passed, report = risk_gate(table, args.threshold, hier, population)
    print(report.to_text(), end="")
    print(f"threshold\t{args.threshold}\npassed\t{passed}")
    return EXIT_OK if passed else EXIT_RISK


def _validate(args) -> int:
    bad = 0
    for rel, problems in validate_tree(args.input):
        for v in problems:
            print(f"{rel}\t{v}")
        bad += bool(problems)
    print(f"{bad} files with violations")
    return EXIT_FAILURES if bad else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "risk":
            return _risk(args)
        if args.command == "validate":
            return _validate(args)
        print(format_pool(pool_tree(args.input)), end="")
        return EXIT_OK
    except CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
