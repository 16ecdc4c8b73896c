"""Exception types shared across the package."""


class EhmpcError(ValueError):
    """Base class for all errors raised by this package."""


class InputError(EhmpcError):
    """An argument is outside its documented domain (non-finite, negative, ...)."""


class InfeasibleDecisionError(EhmpcError):
    """A (sampling, transmission) decision violates an operating constraint.

    Carries the horizon window index and the name of the violated
    constraint when known.
    """

    def __init__(self, message: str, window: int | None = None,
                 constraint: str | None = None):
        super().__init__(message)
        self.window = window
        self.constraint = constraint


class UnboundedError(EhmpcError):
    """A quantity that must be finite is unbounded (e.g. shutdown time at zero drain)."""


class ConfigError(EhmpcError):
    """A run-configuration file is malformed; message names the offending field."""


class DataError(EhmpcError):
    """A data file is malformed; message carries the line number or gap location."""
