"""Exception types shared across the package."""


class EqsimError(Exception):
    """Base class for errors raised by eqsim."""


class ConfigurationError(EqsimError):
    """An equalizer or experiment is set up inconsistently."""


class ParseError(EqsimError):
    """A config file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, lineno: int | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
