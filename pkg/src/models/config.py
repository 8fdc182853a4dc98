"""System configuration models, discriminated on the ``family`` key"""

from __future__ import annotations

import math
from typing import Annotated, Literal, Optional, Union

from typing_extensions import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator

from ..core.linalg import SYMMETRY_RTOL

Matrix = list[list[float]]


def _check_square(name: str, value: Matrix | None, n: int, symmetric: bool = True) -> None:
    if value is None:
        return
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (n, n):
        raise ValueError(f"{name} must be {n}x{n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(arr))))
    if symmetric and float(np.max(np.abs(arr - arr.T))) > SYMMETRY_RTOL * scale:
        raise ValueError(f"{name} must be symmetric within {SYMMETRY_RTOL:g}")


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class BoxConfig(StrictModel):
    """Sampling box: symmetric radius, or explicit per-axis bounds of length 3n"""

    radius: Annotated[float, Field(default=1.0, gt=0, description="Half-width per axis")]
    lower: Annotated[Optional[list[float]], Field(default=None)]
    upper: Annotated[Optional[list[float]], Field(default=None)]
    grid: Annotated[int, Field(default=5, ge=2, description="Grid points per axis")]
    random: Annotated[int, Field(default=0, ge=0, description="Extra uniform samples")]
    seed: Annotated[Optional[int], Field(default=None, ge=0)]

    @model_validator(mode="after")
    def validate_bounds(self) -> Self:
        match (self.lower, self.upper):
            case (None, None):
                return self
            case (list(lo), list(hi)) if len(lo) == len(hi):
                if any(a >= b for a, b in zip(lo, hi)):
                    raise ValueError("Box needs lower < upper on every axis")
                return self
            case (list(), list()):
                raise ValueError("Box lower and upper must have equal length")
            case _:
                raise ValueError("Box lower and upper must be given together")


class ForcingParams(StrictModel):
    """Sinusoidal forcing amplitude·cos(frequency·t + phase)"""

    forcing_amplitude: Annotated[Optional[list[float]], Field(default=None)]
    forcing_frequency: Annotated[float, Field(default=1.0, gt=0)]
    forcing_phase: Annotated[float, Field(default=0.0)]


class LinearConstantParams(ForcingParams):
    A0: Annotated[Matrix, Field(description="Constant damping matrix F")]
    B0: Annotated[Matrix, Field(description="Constant stiffness matrix G")]
    C0: Annotated[Matrix, Field(description="Restoring matrix, H(X) = C0 X")]


class Example4Params(StrictModel):
    w: Annotated[float, Field(default=0.0, description="Forcing phase")]
    forcing: Annotated[
        Literal["state", "time"],
        Field(default="state", description="'time' drops the xyz factor from P"),
    ]


class DiagonalPolynomialParams(ForcingParams):
    c0: Annotated[float, Field(default=1.0, gt=0)]
    c1: Annotated[float, Field(default=0.0, ge=0)]
    c2: Annotated[float, Field(default=0.0, ge=0)]
    c3: Annotated[float, Field(default=0.0, ge=0)]
    a1: Annotated[float, Field(default=1.0)]
    a2: Annotated[float, Field(default=0.0)]
    a3: Annotated[float, Field(default=0.0)]
    g0: Annotated[Optional[float], Field(default=None, gt=0, description="G constant term; c0 when unset")]
    g1: Annotated[Optional[float], Field(default=None, ge=0, description="G X² weight; c1 when unset")]
    g2: Annotated[Optional[float], Field(default=None, ge=0, description="G Y² weight; c2 when unset")]


class SystemConfigBase(StrictModel):
    n: Annotated[int, Field(ge=1, le=16, description="State dimension")]
    A: Annotated[Optional[Matrix], Field(default=None)]
    B: Annotated[Optional[Matrix], Field(default=None)]
    eps: Annotated[float, Field(default=1e-4, gt=0, le=1)]
    omega: Annotated[Optional[float], Field(default=None, gt=0)]
    box: Annotated[BoxConfig, Field(default_factory=BoxConfig)]

    @field_validator("omega")
    @classmethod
    def validate_omega(cls, v: float | None) -> float | None:
        if v is not None and not math.isfinite(v):
            raise ValueError("omega must be finite")
        return v

    @model_validator(mode="after")
    def validate_shapes(self) -> Self:
        _check_square("A", self.A, self.n)
        _check_square("B", self.B, self.n)
        if self.box.lower is not None and len(self.box.lower) != 3 * self.n:
            raise ValueError(f"Box bounds need {3 * self.n} entries, got {len(self.box.lower)}")
        return self

    def _check_forcing(self, params: ForcingParams) -> None:
        if params.forcing_amplitude is not None and len(params.forcing_amplitude) != self.n:
            raise ValueError(f"forcing_amplitude must have {self.n} entries")


class LinearConstantConfig(SystemConfigBase):
    family: Literal["linear-constant"]
    params: LinearConstantParams

    @model_validator(mode="after")
    def validate_params(self) -> Self:
        _check_square("A0", self.params.A0, self.n)
        _check_square("B0", self.params.B0, self.n)
        _check_square("C0", self.params.C0, self.n, symmetric=False)
        self._check_forcing(self.params)
        return self


class Example4Config(SystemConfigBase):
    family: Literal["example4"]
    params: Annotated[Example4Params, Field(default_factory=Example4Params)]

    @model_validator(mode="after")
    def validate_dimension(self) -> Self:
        if self.n != 2:
            raise ValueError(f"example4 is two-dimensional, got n={self.n}")
        return self


class DiagonalPolynomialConfig(SystemConfigBase):
    family: Literal["diagonal-polynomial"]
    params: Annotated[DiagonalPolynomialParams, Field(default_factory=DiagonalPolynomialParams)]

    @model_validator(mode="after")
    def validate_params(self) -> Self:
        self._check_forcing(self.params)
        return self


SystemConfig = Annotated[
    Union[LinearConstantConfig, Example4Config, DiagonalPolynomialConfig],
    Field(discriminator="family"),
]

system_config_adapter: TypeAdapter[SystemConfig] = TypeAdapter(SystemConfig)


def example4_config() -> Example4Config:
    """Canonical configuration of the two-dimensional worked example"""
    return Example4Config(n=2, family="example4", omega=2.0 * math.pi)
