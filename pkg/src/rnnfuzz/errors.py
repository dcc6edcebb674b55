"""Exception types shared across the package."""


class RnnFuzzError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RnnFuzzError, ValueError):
    """Input data violates a documented invariant."""


class ConfigurationError(RnnFuzzError, ValueError):
    """Parameters are out of their allowed range."""


class TraceFormatError(RnnFuzzError, ValueError):
    """A trace or model file does not conform to its grammar."""


class UndefinedDistributionError(RnnFuzzError, KeyError):
    """Queried a (state, input) choice never observed during profiling."""


class UnsupportedFormatError(RnnFuzzError, ValueError):
    """Audio file is not canonical PCM: names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class FullyTrimmedError(RnnFuzzError, ValueError):
    """Trim removed every sample (clip entirely below threshold)."""


class StartupError(RnnFuzzError, RuntimeError):
    """Fuzz campaign could not initialize (model, weights or seeds)."""
