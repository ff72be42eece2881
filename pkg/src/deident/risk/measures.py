"""Equivalence classes and re-identification risk."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .hierarchy import Hierarchy, generalize_rows, hierarchies_for
from .table import QuasiTable, SchemaMismatch

log = logging.getLogger(__name__)


def equivalence_classes(table: QuasiTable, levels=None, hierarchies=None, exclude=frozenset()) -> list[list[int]]:
    """Row indices grouped by equal generalized values, in first-seen order."""
    if hierarchies is None:
        hierarchies = hierarchies_for(table)
    if levels is None:
        levels = [0] * len(table.columns)
    groups: dict[tuple, list[int]] = {}
    for i, key in enumerate(generalize_rows(table, hierarchies, levels)):
        if i not in exclude:
            groups.setdefault(key, []).append(i)
    return list(groups.values())


def prosecutor_risk(partition) -> tuple[Fraction, Fraction]:
    """(max risk, average risk); the average is over rows of 1/own class size."""
    sizes = [len(c) for c in partition if len(c)]
    if not sizes:
        raise ValueError("empty partition")
    n = sum(sizes)
    return Fraction(1, min(sizes)), Fraction(len(sizes), n)


def journalist_risk(sample: QuasiTable, population: QuasiTable, levels=None, hierarchies=None,
                    warnings: list | None = None) -> Fraction:
    """Max over sample classes of 1 / size of the matching population class."""
    if sample.names != population.names:
        raise SchemaMismatch(f"sample columns {sample.names} differ from registry {population.names}")
    if hierarchies is None:
        hierarchies = hierarchies_for(sample)
    if levels is None:
        levels = [0] * len(sample.columns)
    pop = Counter(generalize_rows(population, hierarchies, levels))
    worst = Fraction(0)
    for key in set(generalize_rows(sample, hierarchies, levels)):
        size = pop.get(key, 0)
        if size == 0:
            msg = f"sample class {key} has no match in the registry; risk taken as 1"
            log.warning(msg)
            if warnings is not None:
                warnings.append(msg)
            risk = Fraction(1)
        else:
            risk = Fraction(1, size)
        worst = max(worst, risk)
    return worst


def information_loss(table: QuasiTable, levels, suppressed=(), hierarchies=None) -> Fraction:
    """Mean over cells of level/top, with every suppressed cell counting 1."""
    if hierarchies is None:
        hierarchies = hierarchies_for(table)
    ncols, nrows = len(table.columns), len(table.rows)
    if ncols == 0 or nrows == 0:
        return Fraction(0)
    suppressed = set(suppressed)
    per_row = sum(Fraction(lv, h.top) for lv, h in zip(levels, hierarchies))
    total = per_row * (nrows - len(suppressed)) + ncols * len(suppressed)
    return total / (ncols * nrows)


@dataclass
class RiskReport:
    k_min: int
    class_sizes: dict
    max_risk: Fraction
    avg_risk: Fraction
    journalist_max_risk: Fraction | None = None
    suppressed_fraction: Fraction = Fraction(0)
    chosen_levels: dict = field(default_factory=dict)
    information_loss: Fraction = Fraction(0)
    retained_rows: int = 0
    warnings: list = field(default_factory=list)

    def passes(self, threshold) -> bool:
        return self.max_risk <= Fraction(threshold)

    def to_text(self) -> str:
        lines = [
            f"k_min\t{self.k_min}",
            f"max_risk\t{self.max_risk}\t{float(self.max_risk):.6f}",
            f"avg_risk\t{self.avg_risk}\t{float(self.avg_risk):.6f}",
            "journalist_max_risk\t" + ("-" if self.journalist_max_risk is None else
                                       f"{self.journalist_max_risk}\t{float(self.journalist_max_risk):.6f}"),
            f"suppressed_fraction\t{self.suppressed_fraction}\t{float(self.suppressed_fraction):.6f}",
            f"information_loss\t{self.information_loss}\t{float(self.information_loss):.6f}",
            f"retained_rows\t{self.retained_rows}",
            "chosen_levels\t" + ",".join(f"{k}={v}" for k, v in self.chosen_levels.items()),
            "class_sizes\t" + ",".join(f"{size}:{count}" for size, count in sorted(self.class_sizes.items())),
        ]
        lines += [f"warning\t{w}" for w in self.warnings]
        return "\n".join(lines) + "\n"


def as_fraction(value) -> Fraction:
    """Exact threshold: floats go through their decimal text (0.09 -> 9/100)."""
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def risk_report(table: QuasiTable, levels=None, hierarchies=None, suppressed=(),
                population: QuasiTable | None = None) -> RiskReport:
    if hierarchies is None:
        hierarchies = hierarchies_for(table)
    if levels is None:
        levels = [0] * len(table.columns)
    suppressed = frozenset(suppressed)
    partition = equivalence_classes(table, levels, hierarchies, suppressed)
    sizes = [len(c) for c in partition]
    retained = sum(sizes)
    if sizes:
        max_risk, avg_risk = prosecutor_risk(partition)
    else:
        max_risk = avg_risk = Fraction(0)
    report = RiskReport(
        k_min=min(sizes) if sizes else 0,
        class_sizes=dict(Counter(sizes)),
        max_risk=max_risk,
        avg_risk=avg_risk,
        suppressed_fraction=Fraction(len(suppressed), len(table.rows)) if table.rows else Fraction(0),
        chosen_levels={c.name: lv for c, lv in zip(table.columns, levels)},
        information_loss=information_loss(table, levels, suppressed, hierarchies),
        retained_rows=retained,
    )
    if population is not None and retained:
        kept = QuasiTable(table.columns, [r for i, r in enumerate(table.rows) if i not in suppressed])
        report.journalist_max_risk = journalist_risk(kept, population, levels, hierarchies, report.warnings)
    return report


__all__ = ["Hierarchy", "RiskReport", "as_fraction", "equivalence_classes", "information_loss",
           "journalist_risk", "prosecutor_risk", "risk_report"]
