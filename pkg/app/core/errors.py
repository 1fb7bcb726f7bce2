"""Exception hierarchy shared by services, routes and the CLI."""
from typing import Any, Optional


class WordProblemError(Exception):
    """Base class for every error raised by the toolkit."""


class AlphabetError(WordProblemError):
    pass


class WordSyntaxError(WordProblemError):
    pass


class RegexSyntaxError(WordProblemError):
    pass


class GroupSpecError(WordProblemError):
    pass


class AutomatonError(WordProblemError):
    pass


class EnumerationBudgetExceeded(WordProblemError):
    pass


class FitBudgetExceeded(WordProblemError):
    pass


class SearchBudgetExceeded(WordProblemError):
    pass


class DimensionError(WordProblemError):
    pass


class BoundError(WordProblemError):
    """A numeric bound is outside the range an operation accepts."""


class GraphError(WordProblemError):
    pass


class CosetActionError(WordProblemError):
    pass


class ExperimentError(WordProblemError):
    """A precondition failed or produced values disagree with the closed form."""

    def __init__(self, message: str, diff: Optional[Any] = None):
        super().__init__(message)
        self.diff = diff


class TransductionCounterexample(WordProblemError):
    def __init__(self, message: str, first: str, second: str):
        super().__init__(message)
        self.first = first
        self.second = second


# Errors caused by the caller's input rather than by a failed check.
USAGE_ERRORS = (
    AlphabetError,
    WordSyntaxError,
    RegexSyntaxError,
    GroupSpecError,
    AutomatonError,
    DimensionError,
    BoundError,
    GraphError,
    CosetActionError,
)
