class InfeasibleError(ValueError):
    """Raised when the constraints admit no valid allocation for the geometry."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver fails to reach its tolerance."""
