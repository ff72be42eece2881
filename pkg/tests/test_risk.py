import math
import random
from collections import Counter
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force
from deident.dicom.dataset import DataSet, text_element
from deident.risk import (Column, Hierarchy, HierarchyError, Infeasible, MissingSubjectKey, QuasiTable,
                          SchemaMismatch, equivalence_classes, extract_quasi_table, journalist_risk,
                          parse_hierarchy_spec, parse_qi_spec, parse_table, prosecutor_risk, recode_to_threshold,
                          risk_report)


def test_reference_risks():
    t = QuasiTable([Column("sex")], [("F",), ("F",), ("M",), ("M",), ("M",)])
    part = equivalence_classes(t)
    assert sorted(len(c) for c in part) == [2, 3]
    assert {Fraction(1, len(c)) for c in part} == {Fraction(1, 2), Fraction(1, 3)}
    max_risk, avg = prosecutor_risk(part)
    assert max_risk == Fraction(1, 2) and avg == Fraction(2, 5)


def test_parse_table_and_missing():
    t = parse_table("subject\tage:NUMERIC\tsex:CATEGORICAL\nA\t34\tF\nB\t\tM\n")
    assert t.rows == [(34, "F"), (None, "M")] and t.subjects == ["A", "B"]
    with pytest.raises(SchemaMismatch):
        parse_table("subject\ta\nA\t1\t2\n")
    with pytest.raises(ValueError):
        parse_table("subject\ta:WEIRD\nA\t1\n")


def test_hierarchies():
    h = parse_hierarchy_spec("NUMERIC", "widths=5,10")
    assert [h.generalize(37, lv) for lv in range(4)] == [37, "35-39", "30-39", "*"]
    assert h.lower_bound(37, 2) == 30
    c = parse_hierarchy_spec("CATEGORICAL", "levels=a:x,b:x,c:y|x:z,y:z")
    assert [c.generalize("a", lv) for lv in range(4)] == ["a", "x", "z", "*"]
    with pytest.raises(HierarchyError):
        parse_hierarchy_spec("NUMERIC", "widths=5,7")
    with pytest.raises(HierarchyError):
        Hierarchy("CATEGORICAL", maps=({"a": "x", "b": "x"}, {"a": "p", "b": "q"}))


def test_journalist_risk_and_schema():
    sample = QuasiTable([Column("sex")], [("F",), ("M",)])
    registry = QuasiTable([Column("sex")], [("F",)] * 4 + [("M",)] * 10)
    assert journalist_risk(sample, registry) == Fraction(1, 4)
    warnings = []
    assert journalist_risk(QuasiTable([Column("sex")], [("X",)]), registry, warnings=warnings) == 1
    assert warnings
    with pytest.raises(SchemaMismatch):
        journalist_risk(sample, QuasiTable([Column("age")], [(1,)]))


@st.composite
def tables(draw):
    ncols = draw(st.integers(1, 6))
    nrows = draw(st.integers(1, 200))
    specs, hs, cols = [], [], []
    for j in range(ncols):
        if draw(st.booleans()):
            widths = draw(st.sampled_from([(), (5,), (5, 10), (2, 10, 20)]))
            specs.append(("NUMERIC", widths))
            hs.append(Hierarchy("NUMERIC", widths))
            cols.append(Column(f"c{j}", "NUMERIC"))
        else:
            maps = draw(st.sampled_from([(), ({"a": "ab", "b": "ab", "c": "cd", "d": "cd"},),
                                         ({"a": "ab", "b": "ab", "c": "cd", "d": "cd"},
                                          {"a": "all", "b": "all", "c": "all", "d": "all"})]))
            specs.append(("CATEGORICAL", maps))
            # composed maps: raw -> level value
            composed, cur = [], {}
            for m in maps:
                cur = {r: m.get(cur.get(r, r), cur.get(r, r)) for r in set(m) | set(cur)}
                composed.append(dict(cur))
            hs.append(Hierarchy("CATEGORICAL", maps=tuple(composed)))
            cols.append(Column(f"c{j}"))
    lattice = math.prod(2 + len(p) for _, p in specs)
    if lattice > 800:
        specs, hs, cols = specs[:2], hs[:2], cols[:2]
    rows = []
    for _ in range(nrows):
        row = []
        for kind, _ in specs:
            if draw(st.integers(0, 20)) == 0:
                row.append(None)
            elif kind == "NUMERIC":
                row.append(draw(st.integers(0, 60)))
            else:
                row.append(draw(st.sampled_from("abcd")))
        rows.append(tuple(row))
    return QuasiTable(cols, rows), specs, hs


@settings(max_examples=40, deadline=None)
@given(tables(), st.sampled_from([Fraction(9, 100), Fraction(5, 100)]),
       st.sampled_from([Fraction(0), Fraction(1, 10)]))
def test_recode_matches_brute_force(data, threshold, max_sup):
    table, specs, hs = data
    expected = brute_force(table.rows, specs, threshold, max_sup)
    if expected is None:
        with pytest.raises(Infeasible):
            recode_to_threshold(table, hs, threshold, max_sup)
        return
    levels, suppressed, report = recode_to_threshold(table, hs, threshold, max_sup)
    node = tuple(levels[c.name] for c in table.columns)
    assert (sum(node), report.information_loss, node) == expected[:3]
    assert suppressed == expected[3]
    assert report.max_risk <= threshold
    assert report.retained_rows == len(table.rows) - len(suppressed)


def test_threshold_arithmetic():
    rows = [(i % 3,) for i in range(36)]
    t = QuasiTable([Column("x", "NUMERIC")], rows)
    levels, sup, rep = recode_to_threshold(t, [Hierarchy("NUMERIC", (2,))], 0.09)
    assert rep.k_min >= 12 and rep.max_risk <= Fraction(9, 100) and not sup


@settings(max_examples=10, deadline=None)
@given(tables(), st.integers(0, 10 ** 6))
def test_kmin_monotone_on_upward_paths(data, seed):
    table, _, hs = data
    rng = random.Random(seed)
    tops = [h.top for h in hs]
    for _ in range(100):
        node = [0] * len(tops)
        prev = risk_report(table, node, hs).k_min
        while node != tops:
            j = rng.choice([i for i in range(len(tops)) if node[i] < tops[i]])
            node[j] += 1
            k = risk_report(table, node, hs).k_min
            assert k >= prev
            prev = k


def test_extract_quasi_table():
    def ds(age, sex):
        return DataSet([text_element((0x0010, 0x1010), "AS", age), text_element((0x0010, 0x0040), "CS", sex)])
    spec = parse_qi_spec("age\tNUMERIC\ttag:0010,1010\twidths=10\nsex\tCATEGORICAL\ttag:0010,0040\t\n"
                         "site\tCATEGORICAL\tcolumn:site\t\n")
    t = extract_quasi_table([("A", ds("034Y", "F")), ("B", ds("", "M")), ("A", ds("035Y", "F"))], spec,
                            {"A": {"site": "north"}})
    assert t.subjects == ["A", "B"]
    assert t.rows == [(34, "F", "north"), (None, "M", None)]
    with pytest.raises(MissingSubjectKey):
        extract_quasi_table([("", ds("034Y", "F"))], spec)


def test_report_text():
    t = QuasiTable([Column("sex")], [("F",), ("F",), ("M",)])
    rep = risk_report(t)
    text = rep.to_text()
    assert "k_min\t1" in text and "max_risk\t1" in text
