"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class RCARError(Exception):
    """Base class for all package errors."""


class ConfigError(RCARError, ValueError):
    """Invalid parameter document; ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NonStationaryError(RCARError):
    """Second-order stationarity fails (spectral radius of A2 >= 1)."""


class ThetaStarError(RCARError):
    """Parameter point lies in the pathological set; ``flags`` lists why."""

    def __init__(self, message, flags=()):
        super().__init__(message)
        self.flags = frozenset(flags)


class ExplosionError(RCARError):
    """A simulated path left the representable range."""

    def __init__(self, message, step=None, replication=None):
        super().__init__(message)
        self.step = step
        self.replication = replication


class DegenerateDataError(RCARError, ValueError):
    """Not enough information in the data to form an estimate."""
