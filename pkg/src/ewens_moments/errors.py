"""Exception types shared by every module.

The CLI maps each class to its own exit status, so library code should raise
the most specific class that applies.
"""


class EwensError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DomainError(EwensError, ValueError):
    """An argument lies outside the domain of an operation."""

    exit_code = 4


class UnsupportedParameterError(DomainError):
    """The operation exists but is only defined for other parameter values."""


class ResourceError(EwensError, RuntimeError):
    """A size guard or rejection budget was exhausted."""

    exit_code = 5


class ValidationError(EwensError, ValueError):
    """An object violates one of its invariants, or a check failed."""

    exit_code = 3
