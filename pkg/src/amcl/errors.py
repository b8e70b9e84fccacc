"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operand dimensions are inconsistent."""


class DomainError(ValueError):
    """A scalar argument is outside its valid domain (e.g. T <= 0)."""


class DegenerateInputError(ValueError):
    """Input is structurally valid but degenerate for the operation."""


class NumericError(ArithmeticError):
    """A non-finite value appeared where a finite one is required."""


class ConvergenceError(RuntimeError):
    """An iterative routine failed to converge; carries the last iterate."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class ConfigError(ValueError):
    """Invalid experiment or training configuration."""
