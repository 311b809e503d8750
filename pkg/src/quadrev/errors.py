"""Exception types shared across the package.

The CLI maps these onto exit codes: ``InvalidInputError`` -> 2,
``PreconditionError`` -> 3.
"""


class QuadrevError(Exception):
    """Base class for all package errors."""


class InvalidInputError(QuadrevError, ValueError):
    """Malformed input: wrong shapes, non-finite numbers, bad documents."""


class DimensionError(InvalidInputError):
    """Vectors of different dimension were mixed."""


class PreconditionError(QuadrevError, ValueError):
    """A theorem's hypothesis (or an operation's precondition) does not hold."""


class NoEqualityFamily(QuadrevError, LookupError):
    """No equality configuration is known for the requested parameters."""


class ConsistencyError(QuadrevError, AssertionError):
    """Two independent computations of the same quantity disagree."""
