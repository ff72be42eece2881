"""Quasi-identifier extraction from de-identified datasets."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from ..dicom.dataset import DataSet
from ..dicom.tag import Tag
from ..temporal import BadAgeFormat, age_in_years
from .table import MISSING, Column, MissingSubjectKey, QuasiTable

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class QISpec:
    """One column: where its value comes from and how it may be generalized."""

    name: str
    kind: str
    tag: Tag | None = None
    sidecar_column: str | None = None
    hierarchy: str = ""


def parse_qi_spec(text: str) -> list[QISpec]:
    """Lines ``name<TAB>kind<TAB>source<TAB>hierarchy``; source is ``tag:GGGG,EEEE`` or ``column:NAME``."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        fields = raw.split("\t") + ["", ""]
        name, kind, source, hierarchy = (f.strip() for f in fields[:4])
        kind = kind.upper() or "CATEGORICAL"
        if source.startswith("tag:"):
            out.append(QISpec(name, kind, tag=Tag.parse(source[4:]), hierarchy=hierarchy))
        elif source.startswith("column:"):
            out.append(QISpec(name, kind, sidecar_column=source[7:], hierarchy=hierarchy))
        else:
            raise ValueError(f"qi spec line {lineno}: source must be tag:... or column:...")
    return out


def load_qi_spec(path: str | Path) -> list[QISpec]:
    return parse_qi_spec(Path(path).read_text())


def _value(ds: DataSet, spec: QISpec):
    el = ds.get(spec.tag)
    if el is None or el.is_empty or el.is_sequence:
        return MISSING
    binary = el.vr in ("US", "SS", "UL", "SL", "FL", "FD")
    text = None if binary else el.str_value.strip()
    if spec.kind != "NUMERIC":
        if binary:
            return str(ds.number(spec.tag))
        return text if text else MISSING
    if el.vr == "AS":
        try:
            years = age_in_years(text)
        except BadAgeFormat:
            return MISSING
        return int(years) if text.endswith("Y") else round(years, 2)
    number = ds.number(spec.tag)
    if number is None:
        return MISSING
    return int(number) if float(number).is_integer() else float(number)


def extract_quasi_table(manifest, qi_spec, sidecar: dict | None = None) -> QuasiTable:
    """One row per subject from ``(subject key, dataset)`` pairs; first seen wins.

    ``sidecar`` maps subject key -> {column: value} and is joined on the key.
    """
    columns = [Column(s.name, s.kind) for s in qi_spec]
    rows: dict[str, tuple] = {}
    for subject, ds in manifest:
        if not subject:
            raise MissingSubjectKey("dataset without a subject key")
        row = []
        for spec in qi_spec:
            if spec.tag is not None:
                row.append(_value(ds, spec))
            else:
                v = (sidecar or {}).get(subject, {}).get(spec.sidecar_column, MISSING)
                if v not in (MISSING, "") and spec.kind == "NUMERIC":
                    v = float(v)
                    v = int(v) if v.is_integer() else v
                row.append(MISSING if v == "" else v)
        row = tuple(row)
        if subject in rows:
            if rows[subject] != row:
                log.warning("subject %s has differing quasi-identifiers across files; keeping the first", subject)
            continue
        rows[subject] = row
    keys = list(rows)
    return QuasiTable(columns, [rows[k] for k in keys], keys)
