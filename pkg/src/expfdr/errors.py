"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A numeric argument is outside its valid domain."""


class DataFormatError(ValueError):
    """An input file does not match the expected schema."""


class NumericError(RuntimeError):
    """A numeric routine failed to converge or produced a non-finite value."""
