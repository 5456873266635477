"""Exception types raised across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class ConfigurationError(ValueError):
    """A model specification and its parameters do not agree."""


class UsageError(ValueError):
    """Invalid call pattern, e.g. empty data or mixing fits of different data."""


class ParseError(ValueError):
    """Malformed count-data input."""


class ConvergenceError(RuntimeError):
    """No optimizer start converged.

    The best incumbent (possibly unconverged) fit is kept on ``result``.
    """

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class BandError(RuntimeError):
    """Too many bootstrap or Monte Carlo replicates failed to refit."""

    def __init__(self, message: str, n_failed: int = 0, n_total: int = 0):
        super().__init__(message)
        self.n_failed = n_failed
        self.n_total = n_total
