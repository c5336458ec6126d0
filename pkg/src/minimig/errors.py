"""Error taxonomy shared by every layer of the migration engine."""


class MigrationError(Exception):
    """Base class for all domain errors raised by this package."""


class UnknownParent(MigrationError):
    pass


class UnknownNode(MigrationError):
    pass


class UnknownModel(MigrationError):
    pass


class ForeignNotDeclaration(MigrationError):
    pass


class SameModelStub(MigrationError):
    pass


class UnknownContext(MigrationError):
    pass


class NoRuleFound(MigrationError):
    pass


class ScopeModelMismatch(MigrationError):
    pass


class DuplicateMember(MigrationError):
    pass


class ChooserRequired(MigrationError):
    pass


class ChoiceCancelled(MigrationError):
    """Raised by a chooser to abandon the in-flight directive."""


class RuleApplicationFailed(MigrationError):
    def __init__(self, rule_name: str, cause: Exception):
        super().__init__(f"rule {rule_name!r} failed: {cause}")
        self.rule_name = rule_name
        self.cause = cause


class NotTopOfStack(MigrationError):
    pass


class DirectivePrecondition(MigrationError):
    pass


class ParseError(MigrationError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class NotExportable(MigrationError):
    def __init__(self, violations):
        super().__init__(f"model has {len(violations)} violation(s)")
        self.violations = list(violations)
