"""Exception types shared across the package."""


class NescapeError(Exception):
    """Base class for all package errors."""


class ValidationError(NescapeError, ValueError):
    """An input violates a documented precondition or invariant."""


class SingularityError(NescapeError, ValueError):
    """A formula was evaluated at (or too close to) a singular point."""


class PathologyError(NescapeError, RuntimeError):
    """Numerical pathology, e.g. an unreasonable number of wall bounces
    within a single step."""


class NonEscapeError(NescapeError, RuntimeError):
    """A walk hit its step cap before absorption.

    Carries the partial walk statistics in ``partial`` so callers can
    report censoring instead of silently dropping data.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
