"""Exception types shared across the package."""


class FracDelayError(Exception):
    """Base class for all errors raised by fracdelay."""


class DomainError(FracDelayError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DimensionError(FracDelayError, ValueError):
    """Matrix or vector dimensions are inconsistent."""


class AccuracyError(FracDelayError, ArithmeticError):
    """A numerical routine could not certify its accuracy target."""


class LinearAlgebraError(FracDelayError, ArithmeticError):
    """A dense linear-algebra kernel failed (eigensolver non-convergence)."""


class SingularMatrixError(LinearAlgebraError):
    """A linear solve hit a (numerically) singular matrix."""


class ExprSyntaxError(FracDelayError, ValueError):
    """Time-expression parse failure; carries the byte offset and the
    token set that would have been accepted there."""

    def __init__(self, message: str, offset: int, expected: tuple = ()):
        self.offset = offset
        self.expected = tuple(expected)
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += " (expected: " + ", ".join(self.expected) + ")"
        super().__init__(detail)


class ExprEvalError(FracDelayError, ArithmeticError):
    """Time-expression evaluation failure (division by zero, log of a
    non-positive value, overflow)."""


class ConfigError(FracDelayError, ValueError):
    """A system-config document is malformed; carries the offending key."""

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class ValidationError(FracDelayError, ValueError):
    """A system failed the pre-simulation validation checks."""
