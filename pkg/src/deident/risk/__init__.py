"""Re-identification risk over quasi-identifiers, and recoding to a threshold."""

from .hierarchy import Hierarchy, HierarchyError, load_hierarchies, parse_hierarchies, parse_hierarchy_spec
from .measures import (RiskReport, as_fraction, equivalence_classes, information_loss, journalist_risk,
                       prosecutor_risk, risk_report)
from .recode import Infeasible, min_class_size, recode_to_threshold, suppression_set
from .report import QISpec, extract_quasi_table, load_qi_spec, parse_qi_spec
from .table import MISSING, Column, MissingSubjectKey, QuasiTable, SchemaMismatch, load_table, parse_table

__all__ = [
    "Column", "Hierarchy", "HierarchyError", "Infeasible", "MISSING", "MissingSubjectKey", "QISpec",
    "QuasiTable", "RiskReport", "SchemaMismatch", "as_fraction", "equivalence_classes",
    "extract_quasi_table", "information_loss", "journalist_risk", "load_hierarchies", "load_qi_spec",
    "load_table", "min_class_size", "parse_hierarchies", "parse_hierarchy_spec", "parse_qi_spec",
    "parse_table", "prosecutor_risk", "recode_to_threshold", "risk_report", "suppression_set",
]
