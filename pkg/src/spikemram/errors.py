"""Exception types raised by the simulator."""


class SpikeMramError(Exception):
    """Base class for all simulator errors."""


class ValidationError(SpikeMramError, ValueError):
    """Input or configuration failed a range/shape check."""


class ConfigError(ValidationError):
    pass


class EncodingError(ValidationError):
    """A digital value or weight code is outside its representable range."""


class DimensionError(ValidationError):
    pass


class CorruptionError(SpikeMramError):
    """A cell resistance does not match any of the four programmed states."""


class DegradationError(ValidationError):
    pass


class RegressionError(SpikeMramError):
    """Line fit is undefined (zero variance in the regressor)."""


class ParseError(ValidationError):
    """Malformed CSV/config input; carries the offending line when known."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
