"""
Exception hierarchy shared by the time-scale, model, solver and analysis layers.
"""
from typing import Optional


class SaiqhError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(SaiqhError, ValueError):
    """An argument is outside the accepted range."""


class DomainError(SaiqhError, ValueError):
    """A point or state lies outside the domain of an operation."""


class RegressivityError(SaiqhError, ArithmeticError):
    """A rate fails the regressivity condition 1 + mu*p != 0 (or > 0)."""


class DegenerateParameterError(SaiqhError, ValueError):
    """A formula divides by a vanishing parameter combination."""

    def __init__(self, parameter: str, detail: Optional[str] = None):
        self.parameter = parameter
        message = f"degenerate-parameter: {parameter}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class SolverNegativityError(SaiqhError, RuntimeError):
    """Step halving could not keep the dense integrator nonnegative."""


class ConfigError(SaiqhError, ValueError):
    """A run configuration cannot be parsed or validated."""
