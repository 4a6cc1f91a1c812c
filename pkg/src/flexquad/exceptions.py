"""Exception types raised by flexquad."""


class InvalidArgumentError(ValueError):
    """Bad shape, value range or structure in user input."""


class NotPositiveDefiniteError(InvalidArgumentError):
    """Matrix failed the symmetric factorization check."""


class UnsupportedSizeError(ValueError):
    """A dense operation was requested above the configured dimension cap."""


class DegenerateSystemError(ArithmeticError):
    """The step-size Gram system is numerically zero."""
