"""Exception types raised across the package."""


class HybridMimoError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(HybridMimoError, ValueError):
    pass


class EmptyGridError(HybridMimoError, ValueError):
    pass


class ShapeError(HybridMimoError, ValueError):
    """Operand dimensions do not line up."""


class NumericError(HybridMimoError, ArithmeticError):
    pass


class ConfigError(HybridMimoError, ValueError):
    """Malformed configuration text; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKeyError(ConfigError, KeyError):
    def __init__(self, key, line=None):
        self.key = key
        super().__init__(f"unknown config key {key!r}", line)

    def __str__(self):
        return self.args[0]
