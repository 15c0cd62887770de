"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented precondition or type invariant."""


class InfeasibilityError(RuntimeError):
    """No point satisfying the stated constraints exists or was found.

    ``residual`` carries the smallest constraint violation encountered,
    when one is available.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class InsufficientDataError(RuntimeError):
    """A statistic was requested from an empty sample."""
