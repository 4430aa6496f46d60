"""Exception types shared across the numerical pipeline."""


class DumbbellError(Exception):
    """Base class for all package-specific failures."""


class SingularityError(DumbbellError):
    """State evaluation hit the tan(phi) pole (|cos phi| below threshold)."""


class DegenerateMonodromyError(DumbbellError):
    """Active block of the monodromy gap is numerically singular."""


class NoConvergenceError(DumbbellError):
    """An iterative scheme (quadrature, Newton, shooting) hit its cap."""


class SingularJacobianError(NoConvergenceError):
    """Newton iteration encountered a Jacobian with vanishing determinant."""


class StepSizeUnderflowError(DumbbellError):
    """Adaptive integrator drove the step size below the representable floor."""
