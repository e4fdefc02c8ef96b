"""Exception hierarchy.

Everything that signals a violated geometric or mathematical precondition
derives from :class:`GeometryError`; the CLI maps that family to exit code 3.
"""


class GeometryError(ValueError):
    """A geometric or mathematical precondition does not hold."""


class LPError(GeometryError):
    pass


class InfeasibleError(LPError):
    def __init__(self, message="infeasible"):
        super().__init__(message)


class UnboundedLPError(LPError):
    def __init__(self, message="unbounded"):
        super().__init__(message)


class DegenerateHullError(GeometryError):
    """Points do not affinely span the ambient space."""

    def __init__(self, rank, dim):
        self.rank = rank
        self.dim = dim
        super().__init__(f"degenerate hull: affine rank {rank} < dimension {dim}")


class UnboundedError(GeometryError):
    def __init__(self, message="unbounded intersection"):
        super().__init__(message)


class NotInteriorError(GeometryError):
    def __init__(self, message="center not interior", margin=None):
        self.margin = margin
        super().__init__(message)


class SandwichError(GeometryError):
    """Body is not contained in the reference simplex."""

    def __init__(self, violations, message=None):
        self.violations = list(violations)
        if message is None:
            message = f"body not contained in the simplex; violating vertices: {self.violations}"
        super().__init__(message)


class ConvergenceError(GeometryError):
    def __init__(self, message, last_iterate=None, gradient_norm=None):
        self.last_iterate = last_iterate
        self.gradient_norm = gradient_norm
        super().__init__(message)
