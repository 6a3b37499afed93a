"""Exception hierarchy shared by the library and the CLI exit-code mapping."""

import numpy as np


class EVIError(Exception):
    """Base class for all errors raised by evitest."""


class ParameterError(EVIError, ValueError):
    """Invalid argument: out-of-range k, bad probability, length mismatch, ..."""


class DomainError(EVIError, ArithmeticError):
    """The computation is undefined for the given data (e.g. non-positive Hill threshold)."""


class SingularityError(EVIError, np.linalg.LinAlgError):
    """A matrix that must be positive definite failed to factorize."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class ParseError(EVIError, ValueError):
    """Malformed input file; carries the 1-based row/column of the offending cell."""

    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column
