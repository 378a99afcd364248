"""Exception hierarchy shared by every module of the package."""


class CQBroadcastError(Exception):
    """Base class for all package errors."""


class ShapeError(CQBroadcastError, ValueError):
    """Dimensions or alphabet sizes do not match."""


class OversizeError(CQBroadcastError):
    """A requested operator would exceed the configured dimension guardrail."""

    def __init__(self, dimension, limit, what="operator"):
        self.dimension = int(dimension)
        self.limit = int(limit)
        super().__init__(
            f"{what} dimension {self.dimension} exceeds the guardrail of {self.limit}"
        )


class NumericalError(CQBroadcastError, ArithmeticError):
    """A numerical routine failed to converge or produced non-finite values."""


class NotPSDError(CQBroadcastError, ValueError):
    """An operator expected to be positive semi-definite is not."""


class ParseError(CQBroadcastError, ValueError):
    """A channel document is syntactically malformed."""


class ValidationError(CQBroadcastError, ValueError):
    """A channel document parses but describes an unphysical channel."""


class EmptyTypicalSetError(CQBroadcastError):
    """No sequence satisfies the requested typicality condition."""
