"""Exception types shared by every module."""


class ThzPropError(Exception):
    """Base class for all package errors."""


class DomainError(ThzPropError, ValueError):
    """An input lies outside the validity range of a model."""


class ConfigurationError(ThzPropError, ValueError):
    """A catalog, data file or scenario is malformed or incomplete.

    ``diagnostics`` holds field/line details when the source is a document.
    """

    def __init__(self, message, diagnostics=None, line=None):
        super().__init__(message)
        self.diagnostics = diagnostics
        self.line = line


class NumericalError(ThzPropError, RuntimeError):
    """A numerical procedure failed to converge.

    ``diagnostics`` carries whatever the failing routine knew at the time
    (achieved error estimate, iteration count, ...).
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class ResourceError(ThzPropError, RuntimeError):
    """A computation would exceed a configured size ceiling."""
