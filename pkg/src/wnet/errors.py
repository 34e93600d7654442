"""Exception hierarchy shared by all wnet modules.

The CLI maps these onto exit codes: ValidationError -> 1, DataError -> 2,
anything else -> 3.
"""


class WnetError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(WnetError):
    """Bad arguments or configuration, detected before touching any data."""


class DataError(WnetError):
    """Input data violates a contract (malformed rows, missing GDP, ...)."""
