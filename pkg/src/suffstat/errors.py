"""Exception types shared across the toolkit."""


class SuffstatError(Exception):
    """Base class for toolkit errors."""


class ValidationError(SuffstatError, ValueError):
    """Input failed a precondition (bad schema, bad config, non-finite data)."""


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateLabelError(ValidationError):
    """A label vector is missing one of the two classes."""


class InsufficientDataError(ValidationError):
    """Not enough rows, groups, or points for the requested computation."""


class ShapeError(ValidationError):
    pass
