"""Exception types shared across the package."""


class SMMSError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SMMSError):
    """A point (or a finite-difference stencil around it) leaves the chart domain."""


class SingularMetric(SMMSError):
    """Metric failed the positive-definiteness floor at some evaluated point."""

    def __init__(self, message, point=None, min_eigenvalue=None):
        super().__init__(message)
        self.point = point
        self.min_eigenvalue = min_eigenvalue


class RankMismatch(SMMSError):
    """Tensor operands have incompatible ranks or dimensions."""


class InsufficientSamples(SMMSError):
    """Fewer sample points than the operation requires."""


class NonIntegerM(SMMSError):
    """The dimensional parameter is not the required positive integer."""


class UnrealizableFiber(SMMSError):
    """No coordinate realization is available for the requested fiber."""


class NonPositiveWarp(SMMSError):
    """Warping function is not positive at an evaluated point."""


class ParamConstraintViolation(SMMSError):
    """A family parameter violates its constraint; carries the violated clause."""

    def __init__(self, clause, message=None):
        super().__init__(message or f"parameter constraint violated: {clause}")
        self.clause = clause


class StepSizeUnderflow(SMMSError):
    """Adaptive integrator step size fell below machine resolution."""


class NonFiniteState(SMMSError):
    """ODE state became non-finite during integration."""


class InvalidProblem(SMMSError):
    """Problem data violates the invariants of the solver."""


class PreconditionError(SMMSError):
    """A documented precondition of the operation does not hold."""
