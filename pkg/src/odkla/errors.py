"""Exception types raised across the package."""


class OdklaError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(OdklaError, ValueError):
    pass


class ConnectivityFailure(OdklaError, RuntimeError):
    """No connected graph was drawn within the retry cap."""


class CodeOutOfRange(OdklaError, ValueError):
    pass


class UnsupportedLoss(OdklaError, ValueError):
    pass


class ParseError(OdklaError, ValueError):
    pass


class EmptyDataset(OdklaError, ValueError):
    pass


class TooFewSamples(OdklaError, ValueError):
    pass


class DegenerateRegret(OdklaError, ValueError):
    """Regret is non-positive at a checkpoint, so no log-log fit exists."""


class ConfigError(OdklaError, ValueError):
    """Invalid run configuration; ``field`` names the offending dotted key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class MismatchedExperiment(ConfigError):
    pass


class HashMismatch(OdklaError, UserWarning):
    """Stored golden fixture was produced from a different configuration."""
