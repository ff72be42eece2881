"""Quasi-identifier tables: one row per subject."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

KINDS = ("CATEGORICAL", "ORDINAL", "NUMERIC")
MISSING = None


class SchemaMismatch(ValueError):
    pass


class MissingSubjectKey(ValueError):
    pass


@dataclass(frozen=True)
class Column:
    name: str
    kind: str = "CATEGORICAL"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown column kind {self.kind!r}")


@dataclass
class QuasiTable:
    columns: list[Column]
    rows: list[tuple]
    subjects: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.rows = [tuple(r) for r in self.rows]
        if not self.subjects:
            self.subjects = [str(i) for i in range(len(self.rows))]
        if len(self.subjects) != len(self.rows):
            raise SchemaMismatch("subject keys and rows differ in length")
        for r in self.rows:
            if len(r) != len(self.columns):
                raise SchemaMismatch(f"row of width {len(r)} in a table of {len(self.columns)} columns")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def __len__(self) -> int:
        return len(self.rows)

    def project(self, names) -> "QuasiTable":
        idx = [self.names.index(n) for n in names]
        return QuasiTable([self.columns[i] for i in idx], [tuple(r[i] for i in idx) for r in self.rows],
                          list(self.subjects))

    def to_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        w.writerow(["subject"] + [f"{c.name}:{c.kind}" for c in self.columns])
        for key, row in zip(self.subjects, self.rows):
            w.writerow([key] + ["" if v is MISSING else _fmt(v) for v in row])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


def _number(text: str):
    v = float(text)
    return int(v) if v.is_integer() else v


def parse_table(text: str) -> QuasiTable:
    """Tab-delimited with a typed header: ``subject  age:NUMERIC  sex:CATEGORICAL``."""
    reader = csv.reader(io.StringIO(text), delimiter="\t")
    lines = [r for r in reader if r and not r[0].startswith("#")]
    if not lines:
        return QuasiTable([], [])
    header = lines[0]
    has_key = header[0].lower() == "subject"
    cols = []
    for cell in header[1:] if has_key else header:
        name, _, kind = cell.partition(":")
        cols.append(Column(name.strip(), (kind.strip() or "CATEGORICAL").upper()))
    rows, keys = [], []
    for n, r in enumerate(lines[1:]):
        key = r[0] if has_key else str(n)
        cells = r[1:] if has_key else r
        cells = cells + [""] * (len(cols) - len(cells))
        if len(cells) > len(cols):
            raise SchemaMismatch(f"row {n + 1} has {len(cells)} cells for {len(cols)} columns")
        row = []
        for col, cell in zip(cols, cells):
            cell = cell.strip()
            if cell == "":
                row.append(MISSING)
            elif col.kind == "NUMERIC":
                row.append(_number(cell))
            else:
                row.append(cell)
        rows.append(tuple(row))
        keys.append(key)
    return QuasiTable(cols, rows, keys)


def load_table(path: str | Path) -> QuasiTable:
    return parse_table(Path(path).read_text())
