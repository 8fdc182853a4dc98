"""Linear-constant, worked-example and diagonal-polynomial families"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray

from ..core.system import Vector
from ..models.config import (
    DiagonalPolynomialParams,
    Example4Params,
    ForcingParams,
    LinearConstantParams,
)
from .base import SystemFamily


class _CosineForcing:
    """State-independent P(t) = amplitude·cos(frequency·t + phase)"""

    def __init__(self, n: int, params: ForcingParams) -> None:
        self._amplitude = (
            np.zeros(n)
            if params.forcing_amplitude is None
            else np.asarray(params.forcing_amplitude, dtype=np.float64)
        )
        self._frequency = params.forcing_frequency
        self._phase = params.forcing_phase

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self._frequency

    def __call__(self, t: float) -> Vector:
        return self._amplitude * math.cos(self._frequency * t + self._phase)


class LinearConstantFamily(SystemFamily):
    """F ≡ A0, G ≡ B0, H(X) = C0 X with cosine forcing"""

    name = "linear-constant"

    def __init__(self, n: int, params: LinearConstantParams) -> None:
        super().__init__(n)
        self._f = np.asarray(params.A0, dtype=np.float64)
        self._g = np.asarray(params.B0, dtype=np.float64)
        self._h = np.asarray(params.C0, dtype=np.float64)
        self._forcing = _CosineForcing(n, params)

    @property
    def default_omega(self) -> float:
        return self._forcing.period

    def F(self, X: Vector, Y: Vector, Z: Vector) -> NDArray[np.float64]:
        return self._f

    def G(self, X: Vector, Y: Vector) -> NDArray[np.float64]:
        return self._g

    def H(self, X: Vector) -> Vector:
        return self._h @ X

    def P(self, t: float, X: Vector, Y: Vector, Z: Vector) -> Vector:
        return self._forcing(t)


class Example4Family(SystemFamily):
    """Two-dimensional worked example; x, y, z are the first components of X, Y, Z.

    F = diag(2 + x² + y² + z², 2(2 + x² + y² + z²)),
    G = diag(1 + x² + y², 2(1 + x² + y²)), H = (x², 2x²),
    P = (xyz·cos(t + w), 2xyz·cos(t + w)); with ``forcing="time"`` the xyz
    factor is dropped so the uniqueness branch applies.
    """

    name = "example4"

    def __init__(self, n: int, params: Example4Params) -> None:
        super().__init__(n)
        self._w = params.w
        self._time_only = params.forcing == "time"

    @property
    def forcing_depends_on_state(self) -> bool:
        return not self._time_only

    def F(self, X: Vector, Y: Vector, Z: Vector) -> NDArray[np.float64]:
        s = 2.0 + X[0] ** 2 + Y[0] ** 2 + Z[0] ** 2
        return np.diag([s, 2.0 * s])

    def G(self, X: Vector, Y: Vector) -> NDArray[np.float64]:
        s = 1.0 + X[0] ** 2 + Y[0] ** 2
        return np.diag([s, 2.0 * s])

    def H(self, X: Vector) -> Vector:
        return np.array([X[0] ** 2, 2.0 * X[0] ** 2])

    def P(self, t: float, X: Vector, Y: Vector, Z: Vector) -> Vector:
        wave = math.cos(t + self._w)
        factor = 1.0 if self._time_only else X[0] * Y[0] * Z[0]
        return np.array([factor * wave, 2.0 * factor * wave])


class DiagonalPolynomialFamily(SystemFamily):
    """Componentwise F_ii = c0 + c1·X_i² + c2·Y_i² + c3·Z_i², G_ii = g0 + g1·X_i² + g2·Y_i²
    (each g falls back to its c), H_i = a1·X_i + a2·X_i² + a3·X_i³, cosine forcing"""

    name = "diagonal-polynomial"

    def __init__(self, n: int, params: DiagonalPolynomialParams) -> None:
        super().__init__(n)
        self._p = params
        self._forcing = _CosineForcing(n, params)
        self._g_coeffs = tuple(
            c if g is None else g
            for g, c in ((params.g0, params.c0), (params.g1, params.c1), (params.g2, params.c2))
        )

    @property
    def default_omega(self) -> float:
        return self._forcing.period

    def F(self, X: Vector, Y: Vector, Z: Vector) -> NDArray[np.float64]:
        p = self._p
        return np.diag(p.c0 + p.c1 * X**2 + p.c2 * Y**2 + p.c3 * Z**2)

    def G(self, X: Vector, Y: Vector) -> NDArray[np.float64]:
        g0, g1, g2 = self._g_coeffs
        return np.diag(g0 + g1 * X**2 + g2 * Y**2)

    def H(self, X: Vector) -> Vector:
        p = self._p
        return p.a1 * X + p.a2 * X**2 + p.a3 * X**3

    def P(self, t: float, X: Vector, Y: Vector, Z: Vector) -> Vector:
        return self._forcing(t)
