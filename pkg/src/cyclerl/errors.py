class CycleRlError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(CycleRlError):
    """A configuration value violates a documented precondition."""


class UsageError(CycleRlError):
    """An operation was called in a state where it is not allowed."""


class NumericalError(CycleRlError):
    """A computation produced non-finite values."""
