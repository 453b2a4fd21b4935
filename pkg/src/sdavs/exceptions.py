"""Exception types raised across the package."""


class DataFormatError(ValueError):
    """Input file could not be parsed."""


class DataValidationError(ValueError):
    """Input data violates a model precondition."""


class NumericalError(ArithmeticError):
    """A numerical routine could not produce a valid result."""
