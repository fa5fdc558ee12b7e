"""Exception hierarchy shared by every module."""


class KronStapError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(KronStapError, ValueError):
    """An argument has the wrong shape, range or rank."""


class SizingError(ArgumentError):
    """A requested product dimension exceeds the configured maximum."""


class ValidationError(KronStapError, ValueError):
    """Input violates a mathematical precondition (Hermitian, psd, definite)."""


class DegenerateInputError(KronStapError, ValueError):
    """Input is identically zero or otherwise degenerate for the operation."""


class FormatError(KronStapError, ValueError):
    """A binary file has a bad magic, version, header field or payload length."""


class ConfigError(KronStapError, ValueError):
    """An experiment or scenario configuration does not validate."""


class StapWarning(UserWarning):
    """Emitted for filter requests that are legal but likely to cancel targets."""
