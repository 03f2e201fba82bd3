"""Shared exception types."""


class DataError(ValueError):
    """An input file, argument, or data structure failed validation."""


class NumericError(ArithmeticError):
    """A computation produced non-finite values."""
