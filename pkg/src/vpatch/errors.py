"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of an operation."""


class SelfIntersectionError(DomainError):
    """The discretized boundary self-intersects at the current resolution."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to converge."""
