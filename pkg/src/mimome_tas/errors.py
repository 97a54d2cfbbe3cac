class DomainError(ValueError):
    """Argument outside the domain of the operation."""


class BracketError(ValueError):
    """Root bracket does not contain a sign change."""


class ConvergenceError(RuntimeError):
    """Iterative solver ran out of iterations."""
