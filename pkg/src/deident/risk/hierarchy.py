"""Generalization hierarchies; the top level of every column is ``*``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .table import MISSING, QuasiTable

SUPPRESSED = "*"


class HierarchyError(ValueError):
    pass


@dataclass(frozen=True)
class Hierarchy:
    """Level 0 is the raw value and level ``top`` is ``*``.

    NUMERIC columns use bin ``widths`` (each dividing the next); other
    columns use ``maps``, one raw->generalized dict per intermediate level.
    """

    kind: str = "CATEGORICAL"
    widths: tuple = ()
    maps: tuple = ()

    def __post_init__(self):
        if self.kind == "NUMERIC":
            for a, b in zip(self.widths, self.widths[1:]):
                if b % a:
                    raise HierarchyError(f"bin width {b} is not a multiple of {a}")
            if any(w <= 0 for w in self.widths):
                raise HierarchyError("bin widths must be positive")
        else:
            for lower, upper in zip(self.maps, self.maps[1:]):
                seen: dict = {}
                for raw in set(lower) | set(upper):
                    a, b = lower.get(raw, raw), upper.get(raw, raw)
                    if seen.setdefault(a, b) != b:
                        raise HierarchyError(f"level mapping splits the class of {a!r}")

    @property
    def top(self) -> int:
        return 1 + (len(self.widths) if self.kind == "NUMERIC" else len(self.maps))

    def generalize(self, value, level: int):
        if level == 0:
            return value
        if level >= self.top:
            return SUPPRESSED
        if value is MISSING:
            return MISSING
        if self.kind == "NUMERIC":
            w = self.widths[level - 1]
            lo = math.floor(value / w) * w
            return f"{lo}-{lo + w - 1}"
        return self.maps[level - 1].get(value, value)

    def lower_bound(self, value, level: int):
        """Smallest raw value of the bin holding ``value``; numeric columns only."""
        if self.kind != "NUMERIC" or level == 0 or value is MISSING:
            return value
        if level >= self.top:
            return MISSING
        w = self.widths[level - 1]
        return math.floor(value / w) * w


def default_hierarchy(kind: str) -> Hierarchy:
    return Hierarchy(kind)


def parse_hierarchy_spec(kind: str, spec: str) -> Hierarchy:
    """``widths=5,10,20`` for NUMERIC; ``levels=a:x,b:x|x:y`` otherwise.

    Categorical maps after the first are applied to the previous level's
    output, and are composed here into raw->generalized dicts.
    """
    spec = spec.strip()
    if not spec:
        return Hierarchy(kind)
    key, _, body = spec.partition("=")
    if key == "widths":
        if kind != "NUMERIC":
            raise HierarchyError("bin widths apply to NUMERIC columns only")
        return Hierarchy(kind, tuple(int(w) for w in body.split(",") if w.strip()))
    if key == "levels":
        maps, composed = [], {}
        for level in body.split("|"):
            step = {}
            for pair in level.split(","):
                if pair.strip():
                    raw, _, gen = pair.partition(":")
                    step[raw.strip()] = gen.strip()
            if not composed:
                composed = dict(step)
            else:
                composed = {raw: step.get(g, g) for raw, g in composed.items()}
                for raw, gen in step.items():
                    composed.setdefault(raw, gen)
            maps.append(dict(composed))
        return Hierarchy(kind, maps=tuple(maps))
    raise HierarchyError(f"unrecognized hierarchy spec {spec!r}")


def parse_hierarchies(text: str) -> dict[str, Hierarchy]:
    """Lines ``name<TAB>kind<TAB>spec``."""
    out = {}
    for raw in text.splitlines():
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        fields = raw.split("\t") + [""]
        name, kind, spec = fields[0].strip(), fields[1].strip().upper(), fields[2]
        out[name] = parse_hierarchy_spec(kind, spec)
    return out


def load_hierarchies(path: str | Path) -> dict[str, Hierarchy]:
    return parse_hierarchies(Path(path).read_text())


def hierarchies_for(table: QuasiTable, given: dict | None = None) -> list[Hierarchy]:
    given = given or {}
    return [given.get(c.name) or Hierarchy(c.kind) for c in table.columns]


def generalize_rows(table: QuasiTable, hierarchies, levels) -> list[tuple]:
    return [tuple(h.generalize(v, lv) for v, h, lv in zip(row, hierarchies, levels)) for row in table.rows]
