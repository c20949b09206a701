"""Exception hierarchy shared across the package."""

from __future__ import annotations


class YardSaleError(Exception):
    """Base class for every error raised deliberately by this package."""


class StateError(YardSaleError, ValueError):
    """A wealth vector cannot be turned into a valid state."""


class EmptyStateError(StateError):
    pass


class NegativeWealthError(StateError):
    pass


class ZeroTotalError(StateError):
    pass


class ParameterError(YardSaleError, ValueError):
    """A model, distribution or experiment parameter is out of its domain."""


class UnsupportedClaimError(YardSaleError, ValueError):
    """The requested check has no theoretical backing for this configuration."""


class ConfigError(YardSaleError, ValueError):
    """A run configuration document failed validation.

    ``line`` is the 1-based line of the offending key when it can be located.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ExperimentError(YardSaleError, RuntimeError):
    """An experiment could not produce a meaningful result."""
