"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A scenario or distribution parameter breaks an invariant.

    ``field`` names the offending parameter (dotted path for nested values).
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ScenarioParseError(ValueError):
    """Scenario text is not valid JSON."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"invalid scenario JSON at line {line}, column {column}: {message}")


class DataError(ValueError):
    """Input data unusable for a statistic or KPI (empty, mismatched, incomplete)."""


class InternalLogicError(RuntimeError):
    """The simulator reached a state that violates a model invariant."""
