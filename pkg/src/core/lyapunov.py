"""The quadratic Lyapunov function, its derivative and the decay constants.

``2V = ¼<BX,BX> + 3/2<BY,Y> + <Z,Z> + ||Z + AY + ½BX||²`` is a quadratic form
``sᵀMs`` in ``s = (X, Y, Z)``; the exact derivative along the system is
``(Ms)·rhs``. The printed four-term decomposition is evaluated literally
next to it and the residual reported, never asserted.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..errors import DimensionError, NotPositiveDefiniteError, PreconditionError
from .hypothesis import ForcingBound, SpectralBounds
from .linalg import SymMatrix, sym_eigenvalues
from .system import State, SystemDef, eval_rhs

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-12
# decrease samples span radii delta_8 .. DECREASE_RADIUS_SPAN·delta_8
DECREASE_RADIUS_SPAN = 10.0


@dataclass(frozen=True, slots=True)
class QuadraticBounds:
    delta_2: float
    delta_3: float


@dataclass(frozen=True, slots=True)
class LyapunovReport:
    V: float
    Vdot_exact: float
    V1: float
    V2: float
    V3: float
    V4: float
    decomposition_residual: float


@dataclass(frozen=True, slots=True)
class DecayConstants:
    """Completing-the-square constants and the decrease radii they imply.

    Infeasible outcomes (a non-positive delta_4 or delta_6) are flagged and the
    dependent radii set to infinity, never raised.
    """

    k1: float
    k2: float
    k3: float
    k4: float
    k5: float
    k6: float
    delta_4: float
    delta_5: float
    delta_6: float
    delta_7: float
    delta_8: float
    delta_6_corrected: float
    delta_8_corrected: float
    unit_decrease_radius: float
    unit_decrease_radius_corrected: float
    delta_4_feasible: bool
    delta_6_feasible: bool
    delta_6_corrected_feasible: bool


@dataclass(frozen=True, slots=True)
class DecreaseSpotReport:
    samples: int
    violations: int
    worst_margin: float
    radius_low: float
    radius_high: float
    largest_radius: float

    @property
    def holds(self) -> bool:
        return self.violations == 0


def _require_dims(A: SymMatrix, B: SymMatrix, s: State | None = None) -> int:
    if A.n != B.n:
        raise DimensionError(f"A is {A.n}x{A.n} but B is {B.n}x{B.n}")
    if s is not None and s.n != A.n:
        raise DimensionError(f"State dimension {s.n} does not match matrices {A.n}")
    return A.n


def v_value(A: SymMatrix, B: SymMatrix, s: State) -> float:
    _require_dims(A, B, s)
    a, b = A.entries, B.entries
    bx = b @ s.X
    mixed = s.Z + a @ s.Y + 0.5 * bx
    twice = 0.25 * bx @ bx + 1.5 * s.Y @ b @ s.Y + s.Z @ s.Z + mixed @ mixed
    return 0.5 * float(twice)


def v_gram_matrix(A: SymMatrix, B: SymMatrix) -> NDArray[np.float64]:
    """3n×3n symmetric M with 2V(s) = sᵀMs"""
    n = _require_dims(A, B)
    a, b, eye = A.entries, B.entries, np.eye(n)
    return np.block(
        [
            [0.5 * b @ b, 0.5 * b @ a, 0.5 * b],
            [0.5 * a @ b, 1.5 * b + a @ a, a],
            [0.5 * b, a, 2.0 * eye],
        ]
    )


def v_gram_bounds(A: SymMatrix, B: SymMatrix) -> QuadraticBounds:
    """Extreme eigenvalues (delta_2, delta_3) of the Gram matrix of 2V"""
    spectrum = sym_eigenvalues(SymMatrix.symmetrized(v_gram_matrix(A, B)))
    if spectrum.min <= 0:
        raise NotPositiveDefiniteError(spectrum.min)
    return QuadraticBounds(delta_2=spectrum.min, delta_3=spectrum.max)


def vdot_exact(sys: SystemDef, t: float, s: State) -> float:
    """Chain rule on the quadratic V: gradient Ms dotted with the right-hand side"""
    gradient = v_gram_matrix(sys.A, sys.B) @ s.as_vector()
    return float(gradient @ eval_rhs(sys, t, s))


def vdot_decomposition(
    sys: SystemDef, A: SymMatrix, B: SymMatrix, t: float, s: State
) -> LyapunovReport:
    """Evaluate the four printed terms literally and compare with the exact V̇"""
    _require_dims(A, B, s)
    X, Y, Z = s.X, s.Y, s.Z
    a, b = A.entries, B.entries
    f = sys.f_matrix(X, Y, Z)
    g = sys.g_matrix(X, Y)
    h = sys.h_vector(X)
    p = sys.p_vector(t, X, Y, Z)
    bx, ay = b @ X, a @ Y
    f_minus_a, g_minus_b = f - a, g - b

    v1 = 0.125 * bx @ h + h @ ay + 0.25 * ay @ g @ Y
    v2 = 0.125 * bx @ h + 0.5 * (f @ Z) @ Z + 2.0 * h @ Z
    v3 = (
        0.25 * bx @ h
        + 0.25 * ay @ g @ Y
        + 0.5 * (f @ Z) @ Z
        + 0.5 * bx @ f_minus_a @ Z
        + 0.5 * bx @ g_minus_b @ Y
        + ay @ f_minus_a @ Z
        + 2.0 * (g_minus_b @ Y) @ Z
        + (f_minus_a @ Z) @ Z
        + 0.5 * (g_minus_b @ Y) @ ay
    )
    v4 = (0.5 * bx + ay + 2.0 * Z) @ p

    exact = vdot_exact(sys, t, s)
    printed = float(-v1 - v2 - v3 + v4)
    residual = abs(exact - printed)
    logger.debug("Decomposition residual %.3e at t=%g", residual, t)
    return LyapunovReport(
        V=v_value(A, B, s),
        Vdot_exact=exact,
        V1=float(v1),
        V2=float(v2),
        V3=float(v3),
        V4=float(v4),
        decomposition_residual=residual,
    )


def _root(value: float) -> float:
    return math.sqrt(value) if value > 0 else 0.0


def _radius(delta_7: float, delta_6: float) -> float:
    return 2.0 * delta_7 / delta_6 if delta_6 > FEASIBILITY_TOL else math.inf


def _unit_radius(delta_6: float, delta_8: float) -> float:
    return max(delta_6**-0.5, delta_8) if delta_6 > FEASIBILITY_TOL else math.inf


def decay_constants(bounds: SpectralBounds, forcing: ForcingBound) -> DecayConstants:
    da, Da = bounds.delta_a, bounds.Delta_a
    db, Db = bounds.delta_b, bounds.Delta_b
    dh = bounds.delta_h
    sqrt_eps = math.sqrt(bounds.eps) if bounds.eps > 0 else 0.0

    k1 = _root(0.5 * db / Da) if Da > 0 else 0.0
    k2 = _root(0.5 * da)
    k3 = _root(min(1 / 8, 8 / (3 * Db))) if Db > 0 else 0.0
    k4 = _root(min(Db / 8, 14 / Db)) if Db > 0 else 0.0
    k5 = _root(min(1 / 3, 4 / (3 * Da))) if Da > 0 else 0.0
    k6 = _root(min(2 / (3 * Da), 2 / 3)) if Da > 0 else 0.0

    delta_4 = min(
        0.25 * db * dh - (Db + 1.0) * sqrt_eps,
        0.25 * da * db - (6.0 * Da + 7.0) / 4.0 * sqrt_eps,
        0.5 * da - sqrt_eps,
    )
    delta_5 = max(0.5 * Db, Da, 2.0)
    growth = 3.0 * forcing.delta_1 * delta_5
    delta_6 = 0.5 * min(delta_4, growth)
    delta_6_corrected = 0.5 * (delta_4 - growth)
    delta_7 = math.sqrt(3.0) * forcing.delta_0 * delta_5
    delta_8 = _radius(delta_7, delta_6)
    delta_8_corrected = _radius(delta_7, delta_6_corrected)

    constants = DecayConstants(
        k1=k1,
        k2=k2,
        k3=k3,
        k4=k4,
        k5=k5,
        k6=k6,
        delta_4=delta_4,
        delta_5=delta_5,
        delta_6=delta_6,
        delta_7=delta_7,
        delta_8=delta_8,
        delta_6_corrected=delta_6_corrected,
        delta_8_corrected=delta_8_corrected,
        unit_decrease_radius=_unit_radius(delta_6, delta_8),
        unit_decrease_radius_corrected=_unit_radius(delta_6_corrected, delta_8_corrected),
        delta_4_feasible=delta_4 > FEASIBILITY_TOL,
        delta_6_feasible=delta_6 > FEASIBILITY_TOL,
        delta_6_corrected_feasible=delta_6_corrected > FEASIBILITY_TOL,
    )
    if not constants.delta_4_feasible:
        logger.warning("delta_4 = %.6g is not positive; eps too large for this box", delta_4)
    return constants


def decrease_spot_test(
    sys: SystemDef,
    constants: DecayConstants,
    samples: int = 200,
    seed: int = 0,
) -> DecreaseSpotReport:
    """Sample states with delta_8 <= ||s|| <= 10·delta_8 (corrected constants), radii
    log-uniform, and count those where V̇ > -delta_6·||s||² at a random phase"""
    if not constants.delta_6_corrected_feasible:
        raise PreconditionError(
            "Decrease estimate needs a positive corrected delta_6, "
            f"got {constants.delta_6_corrected:.6g}"
        )
    rng = np.random.default_rng(seed)
    radius_low = constants.delta_8_corrected
    radius_high = DECREASE_RADIUS_SPAN * radius_low if radius_low > 0 else 1.0
    dim = 3 * sys.n

    violations = 0
    worst = math.inf
    largest = 0.0
    for _ in range(samples):
        direction = rng.standard_normal(dim)
        direction /= np.linalg.norm(direction)
        radius = (
            radius_low * DECREASE_RADIUS_SPAN ** rng.uniform()
            if radius_low > 0
            else rng.uniform(0.0, radius_high)
        )
        largest = max(largest, radius)
        s = State.from_vector(direction * radius)
        t = float(rng.uniform(0.0, sys.omega))
        margin = -constants.delta_6_corrected * s.norm_sq - vdot_exact(sys, t, s)
        worst = min(worst, margin)
        if margin < 0:
            violations += 1

    logger.info("Decrease spot test: %d/%d violations", violations, samples)
    return DecreaseSpotReport(samples, violations, worst, radius_low, radius_high, largest)
