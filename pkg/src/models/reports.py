"""Report models built from engine results and their deterministic JSON form"""

from __future__ import annotations

import json
import math
from typing import Annotated, Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator

from ..core.system import State, SystemDef


class ReportModel(BaseModel):
    model_config = ConfigDict(from_attributes=True, frozen=True, extra="ignore")


def _state_list(value: Any) -> Any:
    return value.as_vector().tolist() if isinstance(value, State) else value


class SystemSummary(ReportModel):
    name: str
    n: int
    omega: float
    eps: float
    forcing_depends_on_state: bool
    A: list[list[float]]
    B: list[list[float]]

    @classmethod
    def of(cls, system: SystemDef) -> SystemSummary:
        return cls(
            name=system.name,
            n=system.n,
            omega=system.omega,
            eps=system.eps,
            forcing_depends_on_state=system.forcing_depends_on_state,
            A=system.A.tolist(),
            B=system.B.tolist(),
        )


class SampleModel(ReportModel):
    point: list[float]
    f_eigenvalues: list[float]
    g_eigenvalues: list[float]

    @field_validator("point", mode="before")
    @classmethod
    def to_list(cls, v: Any) -> Any:
        return v.tolist() if hasattr(v, "tolist") else v


class SpectralBoundsModel(ReportModel):
    delta_a: float
    Delta_a: float
    delta_b: float
    Delta_b: float
    delta_h: float
    Delta_h: float
    k_printed: float
    k_proof: float
    sqrt_eps_budget: float
    eps: float
    f_min: float
    f_max: float
    g_min: float
    g_max: float
    f_minus_a_min: float
    f_minus_a_max: float
    g_minus_b_min: float
    g_minus_b_max: float
    h_zero_norm: float
    commutator_f_g: float
    commutator_f_secant: float
    commutator_g_secant: float
    forcing_period_error: float
    secant_cap_first: float
    secant_cap_second: float
    binding_secant_cap: str
    sample_count: int
    grid_points_per_axis: int
    box_lower: list[float]
    box_upper: list[float]
    box_random: int
    seed: int
    samples: Annotated[Optional[list[SampleModel]], Field(default=None)]

    @field_validator("samples", mode="before")
    @classmethod
    def drop_empty(cls, v: Any) -> Any:
        return (list(v) or None) if v is not None else None


class VerdictModel(ReportModel):
    name: str
    relation: str
    lhs: float
    rhs: float
    holds: bool
    non_strict_holds: bool
    required: bool


class ForcingBoundModel(ReportModel):
    delta_0: float
    delta_1: float
    theta1_max: float
    theta2_max: float
    sample_count: int


class DecayConstantsModel(ReportModel):
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


class QuadraticBoundsModel(ReportModel):
    delta_2: float
    delta_3: float


class DecreaseSpotModel(ReportModel):
    samples: int
    violations: int
    worst_margin: float
    radius_low: float
    radius_high: float
    largest_radius: float
    holds: bool


class LyapunovModel(ReportModel):
    V: float
    Vdot_exact: float
    V1: float
    V2: float
    V3: float
    V4: float
    decomposition_residual: float


class OrbitModel(ReportModel):
    s_star: list[float]
    residual: float
    newton_iters: int
    converged: bool
    tolerance: float
    floquet_spectrum_radius: Optional[float] = None

    @field_validator("s_star", mode="before")
    @classmethod
    def to_list(cls, v: Any) -> Any:
        return _state_list(v)


class PeriodicityModel(ReportModel):
    mismatch: float
    tolerance: float
    samples: int
    passes: bool


class DecayFitModel(ReportModel):
    K_fit: float
    delta_fit: float
    fit_window: tuple[float, float]
    r_squared: float
    degenerate: bool
    non_contracting: bool
    floor_reached: bool
    v_delta_fit: float
    window_deltas: tuple[float, float]


class BoundModel(ReportModel):
    Delta_1_est: float
    horizon: float
    start_count: int
    diverged_count: int
    tail_fraction: float
    diverged_at: list[float]


# =============================================================================
# COMMAND REPORTS
# =============================================================================


class CheckReport(ReportModel):
    """Hypothesis verdicts with every number that produced them"""

    command: Literal["check", "certify"] = "check"
    system: SystemSummary
    bounds: SpectralBoundsModel
    conditions: list[VerdictModel]
    forcing: ForcingBoundModel
    decay: DecayConstantsModel

    @computed_field
    @property
    def failed_conditions(self) -> list[str]:
        return [c.name for c in self.conditions if c.required and not c.holds]

    @computed_field
    @property
    def verdict(self) -> str:
        return "fail" if self.failed_conditions else "pass"


class CertifyReport(CheckReport):
    command: Literal["check", "certify"] = "certify"
    quadratic_bounds: Optional[QuadraticBoundsModel] = None
    quadratic_bounds_error: Optional[str] = None
    decrease: Optional[DecreaseSpotModel] = None
    decrease_error: Optional[str] = None
    decomposition_at_unit_state: Optional[LyapunovModel] = None

    @computed_field
    @property
    def certified(self) -> bool:
        return (
            not self.failed_conditions
            and self.quadratic_bounds is not None
            and self.decrease is not None
            and self.decrease.holds
        )


class OrbitReport(ReportModel):
    command: Literal["find-orbit"] = "find-orbit"
    system: SystemSummary
    orbit: OrbitModel
    periodicity: Optional[PeriodicityModel] = None
    multistart: list[OrbitModel] = []
    multistart_attempts: int = 0
    multistart_failures: int = 0


class UniquenessReport(ReportModel):
    command: Literal["uniqueness"] = "uniqueness"
    system: SystemSummary
    pairs: list[DecayFitModel]
    bound: Optional[BoundModel] = None

    @computed_field
    @property
    def contracting(self) -> bool:
        fits = [p for p in self.pairs if not p.degenerate]
        return bool(fits) and all(not p.non_contracting and p.delta_fit > 0 for p in fits)


# =============================================================================
# RENDERING
# =============================================================================


def _encode(value: Any, indent: int) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    match value:
        case None:
            return "null"
        case bool():
            return "true" if value else "false"
        case int():
            return str(value)
        case float():
            return format(value, ".17g") if math.isfinite(value) else "null"
        case str():
            return json.dumps(value)
        case dict() if value:
            items = (f"{inner}{json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in value.items())
            return "{\n" + ",\n".join(items) + f"\n{pad}}}"
        case dict():
            return "{}"
        case list() | tuple() if value:
            items = (f"{inner}{_encode(v, indent + 1)}" for v in value)
            return "[\n" + ",\n".join(items) + f"\n{pad}]"
        case list() | tuple():
            return "[]"
        case _:
            raise TypeError(f"Cannot encode {type(value).__name__}")


def render_json(report: BaseModel) -> str:
    """JSON with 17 significant digits, non-finite floats as null, fixed key order"""
    return _encode(report.model_dump(mode="python"), 0) + "\n"
