"""Exception types raised across the package."""


class SpdiffError(Exception):
    """Base class for all errors raised by spdiff."""


class DimensionError(SpdiffError, IndexError):
    """An index falls outside the declared user/item dimensions."""


class DuplicateLinkError(SpdiffError, ValueError):
    """The same (user, item) pair was supplied twice."""


class ParseError(SpdiffError, ValueError):
    """A rating line could not be parsed."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class RatingRangeError(ParseError):
    """A rating lies outside the 1..5 scale."""


class SpecError(SpdiffError, ValueError):
    """Invalid split, grid or parameter specification."""


class ColdUserError(SpdiffError, ValueError):
    """The target user has no links in the training graph."""


class InsufficientPopulationError(SpdiffError, ValueError):
    """Fewer than two users are available for a pairwise metric."""
