"""Exception hierarchy shared by every module."""


class TreecaError(Exception):
    """Base class for all library errors."""


class InvalidWordError(TreecaError, ValueError):
    pass


class ShapeError(TreecaError, ValueError):
    """Patterns or rules whose geometry, alphabet or depth do not fit together."""


class PatternParseError(TreecaError, ValueError):
    pass


class RuleParseError(TreecaError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SupportExhausted(TreecaError, ValueError):
    """The pattern is too shallow for the requested number of steps."""


class BudgetExceeded(TreecaError):
    def __init__(self, required: int, budget: int, what: str = "enumeration"):
        self.required = required
        self.budget = budget
        super().__init__(
            f"{what} needs {required} evaluated patterns, budget is {budget} "
            f"(raise it with --budget or TREECA_BUDGET)"
        )


class PreconditionError(TreecaError, ValueError):
    pass


class UnsupportedRule(PreconditionError):
    pass


class NoWitnessFound(TreecaError):
    pass


class InconsistencyError(TreecaError):
    pass
