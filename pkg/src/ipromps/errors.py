"""Exception types shared across the package."""


class IPrompsError(Exception):
    """Base class for every error this package raises on purpose."""


class InvalidParameterError(IPrompsError, ValueError):
    """An argument violates a precondition (wrong sign, size, range...)."""


class DomainError(IPrompsError, ValueError):
    """A value lies outside its mathematical domain, e.g. a phase not in [0, 1]."""


class SchemaError(IPrompsError, ValueError):
    """Data does not match the expected channel or file schema."""


class ParseError(IPrompsError, ValueError):
    """A file cell could not be parsed as a number."""


class IllConditionedError(IPrompsError, ArithmeticError):
    """A linear system is singular or too ill-conditioned to solve reliably."""
