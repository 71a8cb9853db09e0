"""Exception hierarchy shared by the solver, the analytic routines and the CLI."""

from __future__ import annotations


class FracMatDerError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(FracMatDerError, ValueError):
    """Invalid parameters or an unsupported combination of options."""


class DomainOfDependenceError(FracMatDerError, IndexError):
    """A stencil or the support of the data leaves the spatial window."""

    def __init__(self, message: str, index: int | None = None) -> None:
        super().__init__(message)
        self.index = index


class AccuracyError(FracMatDerError, ArithmeticError):
    """A quadrature or differentiation routine missed its tolerance."""

    def __init__(self, message: str, estimate: float) -> None:
        super().__init__(f"{message} (achieved error estimate {estimate:.3e})")
        self.estimate = estimate


class PathBudgetError(FracMatDerError, RuntimeError):
    """A Monte Carlo trajectory did not pass the horizon within its step budget."""

    def __init__(self, message: str, budget: int, failures: int = 1) -> None:
        super().__init__(f"{message} (budget {budget} steps, {failures} trajectories)")
        self.budget = budget
        self.failures = failures
