"""Exception types raised across the package."""


class SpiralPencilError(Exception):
    """Base class for all package errors."""


class DomainError(SpiralPencilError, ValueError):
    """An argument lies outside the domain of the operation."""


class EvaluationError(SpiralPencilError, ArithmeticError):
    """An integrand or function produced a non-finite value."""


class UnsupportedConfigurationError(SpiralPencilError, ValueError):
    """A point configuration cannot be turned into a chart polynomial."""


class PoleError(SpiralPencilError, ZeroDivisionError):
    """Evaluation requested exactly at a pole."""


class DegeneratePairError(SpiralPencilError, ValueError):
    """The two sections share a zero, or the fiber polynomial vanishes."""


class DegenerateZeroError(SpiralPencilError, ValueError):
    """A section has a repeated zero where a simple one is required."""


class ResolutionError(SpiralPencilError, ValueError):
    """A scan grid is too coarse for the degree being examined."""


class RootFailureError(SpiralPencilError, ArithmeticError):
    """Simultaneous root iteration did not converge."""

    def __init__(self, message, unconverged=()):
        super().__init__(message)
        self.unconverged = list(unconverged)


class TruncationError(SpiralPencilError, ValueError):
    """A truncated infinite product would drop a non-negligible tail."""
