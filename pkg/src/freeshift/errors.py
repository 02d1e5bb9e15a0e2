"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class FreeshiftError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ValidationError(FreeshiftError, ValueError):
    """Bad input data: malformed tables, non-group multiplication tables,
    inadmissible words, inconsistent potential tables, bad config values."""

    exit_code = 2


class ResourceError(FreeshiftError, RuntimeError):
    """A computation would exceed a configured budget (states, words,
    search depth). The message states the requirement and the budget."""

    exit_code = 3

    def __init__(self, message, required=None, budget=None):
        if required is not None and budget is not None:
            message = f"{message} (required {required}, budget {budget})"
        super().__init__(message)
        self.required = required
        self.budget = budget


class NumericError(FreeshiftError, RuntimeError):
    """Iteration or root search failed to meet its tolerance."""

    exit_code = 4


class UndefinedRatioError(ValidationError):
    """Symmetry statistic with empty numerator and denominator for some
    coset representative."""

    def __init__(self, g):
        super().__init__(
            f"symmetry ratio undefined: no words found in either fiber of {g!r}")
        self.g = g
