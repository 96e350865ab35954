"""Shared exception types for the laboratory."""


class AiryLabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(AiryLabError, ValueError):
    """An input lies outside the documented domain of an operation."""


class ConvergenceError(AiryLabError, RuntimeError):
    """An iterative procedure failed to reach its tolerance."""


class BreakdownError(AiryLabError, RuntimeError):
    """A recurrence or factorization lost positivity / validity."""


class BlowUpError(AiryLabError, RuntimeError):
    """An ODE trajectory produced non-finite state."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class InconsistencyError(AiryLabError, RuntimeError):
    """Two independent routes to the same quantity disagree beyond tolerance."""
