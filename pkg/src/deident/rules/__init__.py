from .actions import OPTION_ORDER, Action, OptionId
from .config import ProfileConfig, load_config, parse_config
from .dummy import synthesize_dummy
from .engine import AuditRecord, Engine, apply, resolve_action
from .errors import (ConfigError, DuplicateRule, MalformedPattern, NoDummyForVR, QuarantineObject,
                     RuleError, UnknownActionCode)
from .private import SafePrivateList, load_safe_private
from .provenance import stamp_provenance
from .table import Rule, RuleTable, load_rule_table, parse_rule_table

__all__ = [
    "Action", "OptionId", "OPTION_ORDER", "ProfileConfig", "load_config", "parse_config",
    "synthesize_dummy", "AuditRecord", "Engine", "apply", "resolve_action", "ConfigError",
    "DuplicateRule", "MalformedPattern", "NoDummyForVR", "QuarantineObject", "RuleError",
    "UnknownActionCode", "SafePrivateList", "load_safe_private", "stamp_provenance", "Rule",
    "RuleTable", "load_rule_table", "parse_rule_table",
]
