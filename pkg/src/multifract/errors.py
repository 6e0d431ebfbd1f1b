"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input object violates its structural invariants."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver fails to reach its tolerance.

    Carries the last residual so callers can report how far the iteration got.
    """

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual
