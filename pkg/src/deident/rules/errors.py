class RuleError(Exception):
    """Problems loading or applying a rule table or profile configuration."""


class DuplicateRule(RuleError):
    pass


class UnknownActionCode(RuleError):
    pass


class MalformedPattern(RuleError):
    pass


class NoDummyForVR(RuleError):
    pass


class ConfigError(RuleError):
    pass


class QuarantineObject(RuleError):
    """The object must be sequestered rather than cleaned."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason
