"""Global recoding: the cheapest lattice node that meets a risk threshold."""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction
from itertools import product

from .hierarchy import generalize_rows, hierarchies_for
from .measures import RiskReport, as_fraction, information_loss, risk_report
from .table import QuasiTable


class Infeasible(ValueError):
    pass


def suppression_set(table: QuasiTable, hierarchies, levels, threshold: Fraction) -> frozenset:
    """Rows whose class risk 1/size exceeds the threshold."""
    k = min_class_size(threshold)
    keys = generalize_rows(table, hierarchies, levels)
    sizes = Counter(keys)
    return frozenset(i for i, key in enumerate(keys) if sizes[key] < k)


def min_class_size(threshold: Fraction) -> int:
    """Smallest class size whose risk 1/size is within the threshold."""
    return math.ceil(1 / as_fraction(threshold))


def lattice_nodes_by_height(tops):
    """Lattice nodes grouped by total height, each group in lexicographic order."""
    by_height: dict[int, list[tuple]] = {}
    for node in product(*(range(t + 1) for t in tops)):
        by_height.setdefault(sum(node), []).append(node)
    return [by_height[h] for h in sorted(by_height)]


def recode_to_threshold(table: QuasiTable, hierarchies=None, threshold=Fraction(9, 100),
                        max_suppression=Fraction(0)) -> tuple[dict, frozenset, RiskReport]:
    """Breadth-first from the bottom of the lattice.

    The first height with a feasible node wins; within it the node of least
    information loss is chosen, ties going to the lexicographically smallest
    level vector.
    """
    threshold = as_fraction(threshold)
    max_suppression = as_fraction(max_suppression)
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    if not 0 <= max_suppression < 1:
        raise ValueError("max_suppression must lie in [0, 1)")
    if hierarchies is None:
        hierarchies = hierarchies_for(table)
    elif isinstance(hierarchies, dict):
        hierarchies = hierarchies_for(table, hierarchies)
    n = len(table.rows)
    tops = [h.top for h in hierarchies]
    for level_nodes in lattice_nodes_by_height(tops):
        best = None
        for node in level_nodes:
            sup = suppression_set(table, hierarchies, node, threshold)
            if n and Fraction(len(sup), n) > max_suppression:
                continue
            loss = information_loss(table, node, sup, hierarchies)
            if best is None or loss < best[0]:
                best = (loss, node, sup)
        if best is not None:
            _, node, sup = best
            report = risk_report(table, node, hierarchies, sup)
            return {c.name: lv for c, lv in zip(table.columns, node)}, sup, report
    raise Infeasible(f"no recoding meets risk {threshold} with at most {max_suppression} suppressed")
