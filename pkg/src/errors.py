"""Exception hierarchy shared by the engine and the command surface"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from .core.integrate import Trajectory


class LyapcertError(Exception):
    """Base class for every error raised by the package"""


# =============================================================================
# INPUT ERRORS (exit code 3)
# =============================================================================


class InputError(LyapcertError):
    """The caller handed us something we cannot work with"""


class DimensionError(InputError):
    """Operands disagree in dimension"""


class ConfigError(InputError):
    """A system config is malformed or inconsistent"""


class PreconditionError(InputError):
    """An operation's precondition does not hold for this input"""


# =============================================================================
# NUMERICAL ERRORS (exit code 2)
# =============================================================================


class NumericalError(LyapcertError):
    """A numerical procedure failed on otherwise valid input"""


class EvaluationError(NumericalError):
    """A field of the system evaluated to a non-finite value"""

    def __init__(self, field: str, message: str | None = None) -> None:
        self.field = field
        super().__init__(message or f"Field {field} evaluated to a non-finite value")


class QuadratureError(NumericalError):
    """The secant identity is violated beyond tolerance"""

    def __init__(self, residual: float, tolerance: float) -> None:
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"Secant residual {residual:.3e} exceeds tolerance {tolerance:.3e}"
        )


class DivergenceError(NumericalError):
    """A trajectory left every bounded region"""

    def __init__(
        self, time: float, trajectory: Trajectory | None = None, reason: str = ""
    ) -> None:
        self.time = time
        self.trajectory = trajectory
        detail = f" ({reason})" if reason else ""
        super().__init__(f"Integration diverged at t={time!r}{detail}")


class StiffnessError(NumericalError):
    """Adaptive step size collapsed below the underflow limit"""

    def __init__(self, time: float, step: float) -> None:
        self.time = time
        self.step = step
        super().__init__(f"Step size underflow (h={step:.3e}) at t={time!r}")


class SingularJacobianError(NumericalError):
    """Newton shooting met an ill-conditioned period-map Jacobian"""

    def __init__(self, condition: float) -> None:
        self.condition = condition
        super().__init__(
            f"Shooting Jacobian is singular (condition {condition:.3e}); "
            "try a different initial guess"
        )


class NotPositiveDefiniteError(NumericalError):
    """A quadratic form that must be positive definite is not"""

    def __init__(self, lambda_min: float) -> None:
        self.lambda_min = lambda_min
        super().__init__(
            f"Quadratic form is not positive definite (lambda_min={lambda_min:.6e})"
        )


class SamplingError(NumericalError):
    """Evaluation failed at a specific sample point of a domain box"""

    def __init__(self, point: Any, cause: Exception) -> None:
        self.point = point
        self.cause = cause
        super().__init__(f"Sampling failed at {point}: {cause}")
