"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A parameter value violates its documented constraints."""


class EdgeListParseError(ValueError):
    """Malformed edge-list input; carries the offending 1-based line number."""

    def __init__(self, message: str, line_number: int = 0):
        super().__init__(message)
        self.line_number = line_number
