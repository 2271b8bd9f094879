"""Exception hierarchy.

Configuration and structural problems are ``ValueError`` subclasses so callers
that only care about "bad input" can catch the builtin.
"""


class ComplementarityError(Exception):
    """Base class for all errors raised by this package."""


class InvalidConfigError(ComplementarityError, ValueError):
    """A parameter is outside its admissible range."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class StructuralError(ComplementarityError, ValueError):
    """Array shapes, lengths or schemas do not line up."""


class IllConditionedError(ComplementarityError, ArithmeticError):
    """A least-squares system stayed singular after regularization."""

    def __init__(self, message, condition_number):
        super().__init__(f"{message} (condition number estimate {condition_number:.3e})")
        self.condition_number = condition_number


class ExperimentError(ComplementarityError, RuntimeError):
    """A replicate failed inside a parameter sweep."""
