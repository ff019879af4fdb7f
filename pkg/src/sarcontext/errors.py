"""Exception types shared across the package."""


class SarcontextError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SarcontextError):
    """A data file could not be parsed. Carries the 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class IntegrityError(SarcontextError):
    """Loaded data violates a structural invariant (duplicate ids, bad
    history ordering, anchor references, missing labels)."""


class ConfigError(SarcontextError):
    """Invalid configuration: bad dimensions, unknown methods, missing models."""


class StratificationError(SarcontextError):
    """Dataset cannot be stratified as requested."""


class AlignmentError(SarcontextError):
    """Predictions and gold labels do not line up by tweet id."""


class TrainingError(SarcontextError):
    """Training aborted (non-finite loss or similar)."""


class EmptyHistoryError(SarcontextError):
    """A user history contains no tweets where at least one is required."""
