"""Exception types shared across the package."""


class AdaptlandError(Exception):
    """Base class for all package errors."""


class ParameterError(AdaptlandError, ValueError):
    """A construction parameter is outside its allowed bounds."""


class ShapeError(AdaptlandError, ValueError):
    """An array or genotype has the wrong length."""


class DomainError(AdaptlandError, ValueError):
    """A numeric input lies outside the function's domain."""


class InsufficientDataError(AdaptlandError, ValueError):
    """Too few samples for the requested computation."""


class ConfigError(AdaptlandError):
    """Invalid configuration document.

    ``key`` names the offending entry when the error is a bound violation;
    ``line``/``column`` are 1-based and set for syntax errors.
    """

    def __init__(self, message: str, *, key: str | None = None,
                 line: int | None = None, column: int | None = None) -> None:
        super().__init__(message)
        self.key = key
        self.line = line
        self.column = column
