"""Third-order vector ODE model in first-order form, secants and differences.

The system is ``X''' + F(X,Y,Z) X'' + G(X,Y) X' + H(X) = P(t,X,Y,Z)`` written as
``X' = Y, Y' = Z, Z' = -F Z - G Y - H(X) + P``. Field callables receive and
return plain numpy arrays; evaluations are validated for finiteness.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING

from typing_extensions import Self

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import DimensionError, EvaluationError, InputError, QuadratureError
from .linalg import SymMatrix

if TYPE_CHECKING:
    from .integrate import IntegratorOptions

logger = logging.getLogger(__name__)

Vector = NDArray[np.float64]
MatrixField3 = Callable[[Vector, Vector, Vector], NDArray[np.float64]]
MatrixField2 = Callable[[Vector, Vector], NDArray[np.float64]]
VectorField = Callable[[Vector], Vector]
Forcing = Callable[[float, Vector, Vector, Vector], Vector]

SECANT_RTOL = 1e-6
DEFAULT_QUAD_ORDER = 8


def _as_vector(values: ArrayLike, n: int | None = None, name: str = "vector") -> Vector:
    vec = np.asarray(values, dtype=np.float64).reshape(-1)
    if n is not None and vec.shape != (n,):
        raise DimensionError(f"{name} has shape {vec.shape}, expected ({n},)")
    if not np.all(np.isfinite(vec)):
        raise InputError(f"{name} has non-finite components")
    return vec


def _checked(name: str, value: NDArray[np.float64]) -> NDArray[np.float64]:
    if not np.all(np.isfinite(value)):
        raise EvaluationError(name)
    return value


@dataclass(frozen=True, slots=True, eq=False)
class State:
    """Position, velocity and acceleration (X, Y, Z) of the system"""

    X: Vector
    Y: Vector
    Z: Vector

    def __post_init__(self) -> None:
        n = np.asarray(self.X).size
        for name in ("X", "Y", "Z"):
            object.__setattr__(self, name, _as_vector(getattr(self, name), n, name))

    @classmethod
    def zeros(cls, n: int) -> Self:
        return cls(np.zeros(n), np.zeros(n), np.zeros(n))

    @classmethod
    def from_vector(cls, values: ArrayLike) -> Self:
        vec = np.asarray(values, dtype=np.float64).reshape(-1)
        if vec.size % 3:
            raise DimensionError(f"State vector length {vec.size} is not a multiple of 3")
        n = vec.size // 3
        return cls(vec[:n], vec[n : 2 * n], vec[2 * n :])

    @property
    def n(self) -> int:
        return self.X.size

    def as_vector(self) -> Vector:
        return np.concatenate([self.X, self.Y, self.Z])

    @property
    def norm_sq(self) -> float:
        return float(self.X @ self.X + self.Y @ self.Y + self.Z @ self.Z)


@dataclass(frozen=True, slots=True, eq=False)
class DifferenceState:
    """Componentwise difference (psi, eta, tau) of two states"""

    psi: Vector
    eta: Vector
    tau: Vector

    def __post_init__(self) -> None:
        n = np.asarray(self.psi).size
        for name in ("psi", "eta", "tau"):
            object.__setattr__(self, name, _as_vector(getattr(self, name), n, name))

    @classmethod
    def between(cls, s1: State, s2: State) -> Self:
        return cls(s1.X - s2.X, s1.Y - s2.Y, s1.Z - s2.Z)

    def as_vector(self) -> Vector:
        return np.concatenate([self.psi, self.eta, self.tau])


@dataclass(frozen=True, slots=True, eq=False)
class SystemDef:
    """Complete definition of a forced third-order vector system"""

    n: int
    F: MatrixField3
    G: MatrixField2
    H: VectorField
    P: Forcing
    A: SymMatrix
    B: SymMatrix
    omega: float
    name: str = "custom"
    forcing_depends_on_state: bool = True
    eps: float = 1e-4
    params: dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InputError(f"Dimension must be positive, got {self.n}")
        if not (self.omega > 0 and np.isfinite(self.omega)):
            raise InputError(f"Period omega must be positive, got {self.omega}")
        if self.A.n != self.n or self.B.n != self.n:
            raise DimensionError(
                f"Comparison matrices have sizes {self.A.n}, {self.B.n}; expected {self.n}"
            )

    def f_matrix(self, X: Vector, Y: Vector, Z: Vector) -> NDArray[np.float64]:
        return _checked("F", np.asarray(self.F(X, Y, Z), dtype=np.float64))

    def g_matrix(self, X: Vector, Y: Vector) -> NDArray[np.float64]:
        return _checked("G", np.asarray(self.G(X, Y), dtype=np.float64))

    def h_vector(self, X: Vector) -> Vector:
        return _checked("H", np.asarray(self.H(X), dtype=np.float64))

    def p_vector(self, t: float, X: Vector, Y: Vector, Z: Vector) -> Vector:
        return _checked("P", np.asarray(self.P(t, X, Y, Z), dtype=np.float64))


# =============================================================================
# RIGHT-HAND SIDES
# =============================================================================


def rhs_vector(sys: SystemDef, t: float, v: Vector) -> Vector:
    """First-order right-hand side on a flat 3n vector"""
    n = sys.n
    X, Y, Z = v[:n], v[n : 2 * n], v[2 * n :]
    zdot = (
        -sys.f_matrix(X, Y, Z) @ Z
        - sys.g_matrix(X, Y) @ Y
        - sys.h_vector(X)
        + sys.p_vector(t, X, Y, Z)
    )
    return np.concatenate([Y, Z, zdot])


def eval_rhs(sys: SystemDef, t: float, s: State) -> Vector:
    """Return (Y, Z, -F Z - G Y - H(X) + P) at time t"""
    if s.n != sys.n:
        raise DimensionError(f"State dimension {s.n} does not match system {sys.n}")
    return rhs_vector(sys, t, s.as_vector())


def difference_rhs(sys: SystemDef, d: DifferenceState) -> Vector:
    """Idealized difference dynamics with the fields evaluated at (psi, eta, tau).

    Exact only when F and G are constant; the paired integration in
    :func:`paired_difference_trajectory` is the faithful difference.
    """
    psi, eta, tau = d.psi, d.eta, d.tau
    if psi.size != sys.n:
        raise DimensionError(f"Difference dimension {psi.size} does not match {sys.n}")
    tau_dot = (
        -sys.f_matrix(psi, eta, tau) @ tau
        - sys.g_matrix(psi, eta) @ eta
        - sys.h_vector(psi)
    )
    return np.concatenate([eta, tau, tau_dot])


# =============================================================================
# SECANT OPERATOR
# =============================================================================


@dataclass(frozen=True, slots=True, eq=False)
class SecantOperator:
    """Averaged Jacobian of H along a segment.

    ``matrix`` satisfies the secant identity and need not be symmetric;
    ``sym`` is its symmetric part, whose spectrum bounds <A(X,Y)v, v>.
    """

    matrix: NDArray[np.float64]
    sym: SymMatrix
    residual: float

    @property
    def is_symmetric(self) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        return float(np.max(np.abs(self.matrix - self.matrix.T))) <= 1e-9 * scale


@lru_cache(maxsize=16)
def _gauss_legendre_unit(order: int) -> tuple[Vector, Vector]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def h_jacobian(sys: SystemDef, X: Vector) -> NDArray[np.float64]:
    """Central finite-difference Jacobian of H, step max(1e-6, 1e-6|x_j|)"""
    n = sys.n
    jac = np.empty((n, n))
    for j in range(n):
        h = max(1e-6, 1e-6 * abs(X[j]))
        step = np.zeros(n)
        step[j] = h
        jac[:, j] = (sys.h_vector(X + step) - sys.h_vector(X - step)) / (2.0 * h)
    return jac


def secant_operator(
    sys: SystemDef,
    X: ArrayLike,
    Yv: ArrayLike,
    quad_order: int = DEFAULT_QUAD_ORDER,
    rtol: float = SECANT_RTOL,
) -> SecantOperator:
    """Gauss–Legendre average of J_H over the segment from Yv to X"""
    if quad_order < 1:
        raise InputError(f"Quadrature order must be at least 1, got {quad_order}")
    x = _as_vector(X, sys.n, "X")
    y = _as_vector(Yv, sys.n, "Y")
    delta = x - y

    if not np.any(delta):
        jac = h_jacobian(sys, x)
        return SecantOperator(jac, SymMatrix.symmetrized(jac), 0.0)

    nodes, weights = _gauss_legendre_unit(quad_order)
    avg = sum(w * h_jacobian(sys, y + s * delta) for s, w in zip(nodes, weights))
    avg = np.asarray(avg, dtype=np.float64)

    increment = sys.h_vector(x) - sys.h_vector(y)
    residual = float(np.linalg.norm(avg @ delta - increment))
    tolerance = rtol * (1.0 + float(np.linalg.norm(increment)))
    if residual > tolerance:
        raise QuadratureError(residual, tolerance)

    return SecantOperator(avg, SymMatrix.symmetrized(avg), residual)


# =============================================================================
# PAIRED SYSTEMS
# =============================================================================


@dataclass(frozen=True, slots=True, eq=False)
class DifferenceSeries:
    """Norm of the difference between two paired solutions on a uniform grid"""

    times: Vector
    norms: Vector
    differences: NDArray[np.float64]
    # largest state norm reached by either copy
    scale: float = 0.0


def paired_difference_trajectory(
    sys: SystemDef,
    s1: State,
    s2: State,
    t1: float,
    steps: int,
    t0: float = 0.0,
    opts: IntegratorOptions | None = None,
) -> DifferenceSeries:
    """Integrate two copies of the system under the shared forcing.

    The copies are stacked into one 6n-dimensional system so both share the
    step sequence. Raises ``PreconditionError`` when P depends on the state.
    """
    from .hypothesis import require_state_independent_forcing
    from .integrate import IntegratorOptions, integrate_vector

    require_state_independent_forcing(sys)
    if s1.n != sys.n or s2.n != sys.n:
        raise DimensionError("Paired states do not match the system dimension")

    m = 3 * sys.n

    def stacked(t: float, v: Vector) -> Vector:
        return np.concatenate([rhs_vector(sys, t, v[:m]), rhs_vector(sys, t, v[m:])])

    options = opts or IntegratorOptions()
    times, states, _, _ = integrate_vector(
        stacked,
        np.concatenate([s1.as_vector(), s2.as_vector()]),
        t0,
        t1,
        options.model_copy(update={"n_out": steps}),
    )
    diffs = states[:, :m] - states[:, m:]
    logger.debug("Paired integration produced %d samples", len(times))
    scale = float(np.max(np.linalg.norm(states.reshape(len(times), 2, m), axis=2)))
    return DifferenceSeries(times, np.linalg.norm(diffs, axis=1), diffs, scale)
