"""Declarative rule table: one row per tag or masked tag pattern."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

from ..dicom.tag import Tag, TagPattern
from .actions import Action, OptionId, OPTION_ORDER
from .errors import DuplicateRule, MalformedPattern, UnknownActionCode


@dataclass(frozen=True)
class Rule:
    pattern: TagPattern
    keyword: str
    baseline: Action
    overrides: dict = field(default_factory=dict)  # OptionId -> Action
    line: int = 0

    @property
    def rule_id(self) -> str:
        return f"{self.pattern.text} {self.keyword}"

    def action_for(self, options: Iterable[OptionId]) -> Action:
        active = set(options)
        for opt in OPTION_ORDER:
            if opt in active and opt in self.overrides:
                return self.overrides[opt]
        return self.baseline


class RuleTable:
    """Rules with resolution order exact tag, then most specific pattern."""

    def __init__(self, rules: Iterable[Rule]):
        self.rules: list[Rule] = []
        self.exact: dict[Tag, Rule] = {}
        self.masked: list[Rule] = []
        seen_patterns: set[str] = set()
        for rule in rules:
            if rule.pattern.is_exact:
                tag = rule.pattern.tag()
                if tag in self.exact:
                    raise DuplicateRule(f"duplicate rule for {tag} (line {rule.line})")
                self.exact[tag] = rule
            else:
                if rule.pattern.text in seen_patterns:
                    raise DuplicateRule(f"duplicate pattern {rule.pattern.text} (line {rule.line})")
                seen_patterns.add(rule.pattern.text)
                self.masked.append(rule)
            self.rules.append(rule)
        # stable sort keeps file order among equally specific patterns
        self.masked.sort(key=lambda r: -r.pattern.specificity)

    def lookup(self, tag: Tag) -> Rule | None:
        rule = self.exact.get(tag)
        if rule is not None:
            return rule
        for r in self.masked:
            if r.pattern.matches(tag):
                return r
        return None

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)


def _action(code: str, lineno: int) -> Action:
    try:
        return Action(code.strip().upper())
    except ValueError:
        raise UnknownActionCode(f"line {lineno}: unknown action {code!r}") from None


def parse_rule_table(text: str) -> RuleTable:
    header: list[str] | None = None
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = [f.strip() for f in line.split("\t")]
        if header is None and fields[0].lower() == "tag":
            header = fields
            for name in header[3:]:
                try:
                    OptionId(name)
                except ValueError:
                    raise UnknownActionCode(f"line {lineno}: unknown option column {name!r}") from None
            continue
        if len(fields) == 1:
            # tolerate whitespace-separated rows such as "0010,0010  PatientName  DUMMY"
            fields = line.split()
        if len(fields) < 3:
            raise MalformedPattern(f"line {lineno}: expected tag, keyword and action")
        try:
            pattern = TagPattern(fields[0])
        except ValueError as exc:
            raise MalformedPattern(f"line {lineno}: {exc}") from None
        baseline = _action(fields[2], lineno)
        overrides = {}
        columns = header[3:] if header else []
        for name, cell in zip(columns, fields[3:]):
            if cell and cell != "-":
                overrides[OptionId(name)] = _action(cell, lineno)
        rules.append(Rule(pattern, fields[1], baseline, overrides, lineno))
    return RuleTable(rules)


def load_rule_table(source: str | Path | None = None) -> RuleTable:
    """Load a rule file; None loads the shipped table."""
    if source is None:
        text = resources.files("deident.rules").joinpath("data/rules.tsv").read_text()
    else:
        text = Path(source).read_text()
    return parse_rule_table(text)
