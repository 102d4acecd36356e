"""Exception types shared across the library."""


class InvalidInput(ValueError):
    """Raised when an argument violates a documented precondition."""


class NotPsd(ValueError):
    """Raised when a matrix required to be positive semi-definite is not."""


class ParseError(ValueError):
    """Raised on malformed external files (PGM headers, configs)."""
