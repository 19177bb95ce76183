"""Exception hierarchy shared by every module of the package."""


class WiksError(Exception):
    """Base class for all package errors."""


class ParameterError(WiksError, ValueError):
    """A distribution or model parameter violates its invariants."""


class InputError(WiksError, ValueError):
    """Malformed call arguments: wrong dimension, empty sample, bad range."""


class UsageError(WiksError, ValueError):
    """Unknown identifiers or invalid option combinations."""


class ConfigurationError(UsageError):
    """A run configuration is incomplete or inconsistent."""


class ResourceError(WiksError, RuntimeError):
    """The requested computation exceeds a configured resource cap."""


class DegenerateDataError(InputError):
    """The data make a statistic undefined (e.g. zero variance)."""


class ParseError(InputError):
    """A sample file could not be parsed.

    Parameters
    ----------
    message : str
        Human-readable description.
    line : int, optional
        1-based line number where parsing failed.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
