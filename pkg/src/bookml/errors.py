"""Exception hierarchy shared across the package.

Each class maps to one CLI exit code so batch scripts can branch on the
failure category.
"""


class BookmlError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(BookmlError):
    """Invalid configuration: bad parameter values or incompatible options."""

    exit_code = 2


class DataError(BookmlError):
    """Unusable input data: schema mismatches, empty tables, bad labels."""

    exit_code = 3


class NumericError(BookmlError):
    """Numerical failure during fitting: divergence, singular systems."""

    exit_code = 4


class NotFittedError(BookmlError):
    """An estimator method requiring a fitted state was called before fit."""

    exit_code = 1
