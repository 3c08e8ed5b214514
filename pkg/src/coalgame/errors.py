"""Exception types shared across the package."""

from __future__ import annotations


class CoalgameError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(CoalgameError, ValueError):
    """An argument violates a documented precondition (bad n, K, player id, ...)."""


class BudgetExceededError(CoalgameError):
    """An exhaustive computation would exceed the configured profile budget.

    Raised instead of silently truncating: callers must either raise the
    budget or choose a cheaper method.
    """

    def __init__(self, message: str, required: int, budget: int):
        super().__init__(message)
        self.required = required
        self.budget = budget


class InternalInconsistencyError(CoalgameError):
    """Two computations that must agree did not (e.g. a rule whose induced
    domains fail to partition the profile space)."""


class GameSpecError(CoalgameError, ValueError):
    """A game spec file failed to parse or validate.

    ``location`` is a JSON-path-like string pointing at the offending key.
    """

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location
