"""Exception hierarchy for py-vhalab."""

from typing import Optional


class VhaLabError(Exception):
    """Base class for every error raised by py-vhalab."""


class ModeIndexError(VhaLabError, IndexError):
    """A ladder factor references a mode outside the operator's register."""


class MatrixSizeError(VhaLabError, ValueError):
    """A dense matrix would exceed the memory guard."""


class NonHermitianError(VhaLabError, ValueError):
    """An operation that needs a Hermitian operator received a non-Hermitian one."""


class DegenerateFermiLevelError(VhaLabError):
    """The highest occupied and lowest empty orbital are degenerate."""


class SelfConsistencyError(VhaLabError):
    """The mean-field fixed-point iteration did not converge."""

    def __init__(self, message: str, last: Optional[object] = None, residual: float = float("nan")) -> None:
        super().__init__(message)
        self.last = last
        self.residual = residual


class CircuitError(VhaLabError, ValueError):
    """Circuit and state dimensions disagree, or a gate is malformed."""


class ParameterCountError(VhaLabError, ValueError):
    """A parameter vector has the wrong length for its ansatz."""


class MitigationError(VhaLabError, ValueError):
    """Richardson extrapolation cannot be performed on the given points."""


class ConfigError(VhaLabError):
    """The experiment configuration is malformed."""


class PlotError(VhaLabError):
    """A figure cannot be produced from the given table."""


class MeanFieldError(VhaLabError, ValueError):
    """No Gaussian state can be built for a mean-field Hamiltonian."""


class NumericalError(VhaLabError):
    """A linear-algebra or floating-point routine failed during a solve."""
