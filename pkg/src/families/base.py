"""Abstract system family interface"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import ClassVar

import numpy as np
from numpy.typing import NDArray

from ..core.linalg import SymMatrix
from ..core.system import SystemDef, Vector


class SystemFamily(ABC):
    """Parameterized constructor for F, G, H and P of one family of systems"""

    name: ClassVar[str]

    def __init__(self, n: int) -> None:
        self.n = n

    @abstractmethod
    def F(self, X: Vector, Y: Vector, Z: Vector) -> NDArray[np.float64]:
        """Damping matrix field"""

    @abstractmethod
    def G(self, X: Vector, Y: Vector) -> NDArray[np.float64]:
        """Stiffness matrix field"""

    @abstractmethod
    def H(self, X: Vector) -> Vector:
        """Restoring vector field"""

    @abstractmethod
    def P(self, t: float, X: Vector, Y: Vector, Z: Vector) -> Vector:
        """Periodic forcing"""

    @property
    def default_omega(self) -> float:
        return 2.0 * math.pi

    @property
    def forcing_depends_on_state(self) -> bool:
        return False

    def default_comparison(self, eps: float) -> tuple[SymMatrix, SymMatrix]:
        """A = F(0,0,0) - (√ε/4)I and B = G(0,0) - (√ε/4)I"""
        zero = np.zeros(self.n)
        shift = -0.25 * math.sqrt(eps)
        a = SymMatrix.from_array(self.F(zero, zero, zero)).shifted(shift)
        b = SymMatrix.from_array(self.G(zero, zero)).shifted(shift)
        return a, b

    def build(
        self,
        eps: float,
        omega: float | None = None,
        A: SymMatrix | None = None,
        B: SymMatrix | None = None,
        params: dict[str, object] | None = None,
    ) -> SystemDef:
        default_a, default_b = self.default_comparison(eps)
        return SystemDef(
            n=self.n,
            F=self.F,
            G=self.G,
            H=self.H,
            P=self.P,
            A=A if A is not None else default_a,
            B=B if B is not None else default_b,
            omega=omega if omega is not None else self.default_omega,
            name=self.name,
            forcing_depends_on_state=self.forcing_depends_on_state,
            eps=eps,
            params=params or {},
        )
