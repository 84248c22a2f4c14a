"""Exception hierarchy shared across the package."""


class ElFarolError(Exception):
    """Base class for all package errors."""


class DomainError(ElFarolError, ValueError):
    """An argument is outside the domain an operation is defined on."""


class ConfigError(ElFarolError, ValueError):
    """A configuration value violates its invariants."""


class NumericalError(ElFarolError, ArithmeticError):
    """A computation produced NaN/inf or violated a numerical sanity check."""
