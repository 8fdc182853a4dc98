"""Fixed-step RK4 and adaptive Runge–Kutta–Fehlberg 4(5) integration"""

from __future__ import annotations

import io
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, replace
from typing import Annotated, Literal, NamedTuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from ..errors import DivergenceError, EvaluationError, InputError, StiffnessError
from .linalg import SymMatrix
from .system import State, SystemDef, Vector, rhs_vector

logger = logging.getLogger(__name__)

Rhs = Callable[[float, Vector], Vector]

# Fehlberg tableau: 4th-order solution propagated, 5th-order difference as error
_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)
_ERR = (1 / 360, 0.0, -128 / 4275, -2197 / 75240, 1 / 50, 2 / 55)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
UNDERFLOW = 1e-14


class IntegratorOptions(BaseModel):
    """Integrator choice, step control and output sampling"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    method: Annotated[
        Literal["rk4", "rkf45"], Field(default="rkf45", description="Scheme")
    ]
    h: Annotated[float, Field(default=0.01, gt=0, description="RK4 step size")]
    rtol: Annotated[float, Field(default=1e-8, gt=0, description="RKF45 relative tol")]
    atol: Annotated[float, Field(default=1e-10, gt=0, description="RKF45 absolute tol")]
    n_out: Annotated[int, Field(default=100, ge=1, description="Output intervals")]
    blowup: Annotated[float, Field(default=1e12, gt=0, description="Divergence norm")]
    max_steps: Annotated[int, Field(default=10_000_000, ge=1)]


@dataclass(frozen=True, slots=True)
class IntegratorMeta:
    method: str
    step: float | None
    rtol: float | None
    atol: float | None
    steps: int
    rejected: int


class MarchResult(NamedTuple):
    times: Vector
    values: NDArray[np.float64]
    meta: IntegratorMeta
    diverged_at: float


@dataclass(frozen=True, slots=True, eq=False)
class Trajectory:
    """Uniformly sampled solution; truncated at the last finite sample on blow-up"""

    times: Vector
    values: NDArray[np.float64]
    n: int
    meta: IntegratorMeta
    v_series: Vector | None = None
    diverged: bool = False
    diverged_at: float | None = None

    def state(self, index: int) -> State:
        return State.from_vector(self.values[index])

    @property
    def states(self) -> list[State]:
        return [State.from_vector(row) for row in self.values]

    @property
    def final_state(self) -> State:
        return self.state(-1)

    @property
    def norm_sq(self) -> Vector:
        return np.sum(self.values**2, axis=1)

    def with_v(self, A: SymMatrix, B: SymMatrix) -> Trajectory:
        """Attach the Lyapunov function along the samples"""
        from .lyapunov import v_value

        series = np.array([v_value(A, B, s) for s in self.states])
        return replace(self, v_series=series)


# =============================================================================
# STEPPERS
# =============================================================================


def _rk4_step(rhs: Rhs, t: float, y: Vector, h: float) -> Vector:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _rkf45_step(rhs: Rhs, t: float, y: Vector, h: float) -> tuple[Vector, Vector]:
    """One Fehlberg step: (4th-order solution, local error estimate)"""
    k: list[Vector] = []
    for c, row in zip(_C, _A):
        incr = sum((a * kj for a, kj in zip(row, k)), np.zeros_like(y))
        k.append(rhs(t + c * h, y + h * incr))
    y4 = y + h * sum((b * kj for b, kj in zip(_B4, k)), np.zeros_like(y))
    err = h * sum((e * kj for e, kj in zip(_ERR, k)), np.zeros_like(y))
    return y4, err


def _escaped(y: Vector, blowup: float) -> bool:
    return not np.all(np.isfinite(y)) or float(np.linalg.norm(y)) > blowup


# =============================================================================
# DRIVER
# =============================================================================


def integrate_vector(
    rhs: Rhs,
    v0: Vector,
    t0: float,
    t1: float,
    opts: IntegratorOptions,
    raise_on_divergence: bool = True,
) -> MarchResult:
    """March a flat system to each of ``opts.n_out`` uniform output times.

    Every output time is hit exactly by truncating the last step of each
    interval. With ``raise_on_divergence=False`` a blow-up is reported through
    ``diverged_at`` (NaN when the run stayed bounded) and the arrays stop at
    the last finite sample.
    """
    if t1 == t0:
        raise InputError("Integration span must be non-empty")
    direction = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)
    t_out = np.linspace(t0, t1, opts.n_out + 1)

    y = np.array(v0, dtype=np.float64)
    values = [y.copy()]
    times = [float(t0)]
    steps = rejected = 0
    h = direction * (min(opts.h, span) if opts.method == "rk4" else span / 100.0)
    diverged_at = math.nan

    with np.errstate(all="ignore"):
        try:
            for target in t_out[1:]:
                t = times[-1]
                if opts.method == "rk4":
                    interval = abs(target - t)
                    count = max(1, math.ceil(interval / opts.h * (1 - 1e-12)))
                    step = (target - t) / count
                    for i in range(count):
                        y = _rk4_step(rhs, t + i * step, y, step)
                        if _escaped(y, opts.blowup):
                            raise DivergenceError(t + (i + 1) * step)
                    steps += count
                else:
                    while direction * (target - t) > 0:
                        if abs(h) < UNDERFLOW * span:
                            raise StiffnessError(t, abs(h))
                        if steps + rejected >= opts.max_steps:
                            raise StiffnessError(t, abs(h))
                        truncated = direction * (t + h - target) > 0
                        h_try = target - t if truncated else h
                        y_new, err = _rkf45_step(rhs, t, y, h_try)
                        scale = opts.atol + opts.rtol * np.maximum(np.abs(y), np.abs(y_new))
                        ratio = float(np.max(np.abs(err) / scale))
                        if not math.isfinite(ratio):
                            if _escaped(y_new, opts.blowup):
                                raise DivergenceError(t + h_try)
                            ratio = 1e10
                        factor = (
                            MAX_FACTOR
                            if ratio == 0.0
                            else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * ratio**-0.2))
                        )
                        if ratio <= 1.0:
                            t = target if truncated else t + h_try
                            y = y_new
                            steps += 1
                            if _escaped(y, opts.blowup):
                                raise DivergenceError(t)
                            h = h_try * factor if not truncated else max(h, h_try * factor, key=abs)
                        else:
                            rejected += 1
                            h = h_try * factor
                times.append(float(target))
                values.append(y.copy())
        except (DivergenceError, EvaluationError) as exc:
            diverged_at = exc.time if isinstance(exc, DivergenceError) else times[-1]
            logger.info("Trajectory escaped at t=%.6g", diverged_at)

    meta = IntegratorMeta(
        method=opts.method,
        step=opts.h if opts.method == "rk4" else None,
        rtol=opts.rtol if opts.method == "rkf45" else None,
        atol=opts.atol if opts.method == "rkf45" else None,
        steps=steps,
        rejected=rejected,
    )
    t_arr, v_arr = np.array(times), np.array(values)

    if raise_on_divergence and not math.isnan(diverged_at):
        raise DivergenceError(diverged_at, reason=f"last finite sample t={times[-1]!r}")
    return MarchResult(t_arr, v_arr, meta, diverged_at)


def integrate(
    sys: SystemDef,
    s0: State,
    t0: float,
    t1: float,
    opts: IntegratorOptions | None = None,
    raise_on_divergence: bool = True,
) -> Trajectory:
    """Integrate the first-order system from ``s0`` over ``[t0, t1]``.

    On divergence the partial trajectory is attached to the raised
    ``DivergenceError`` (or returned with ``diverged`` set when
    ``raise_on_divergence`` is false).
    """
    if not t1 > t0:
        raise InputError(f"Need t1 > t0, got t0={t0}, t1={t1}")
    opts = opts or IntegratorOptions()

    def rhs(t: float, v: Vector) -> Vector:
        return rhs_vector(sys, t, v)

    times, values, meta, diverged_at = integrate_vector(
        rhs, s0.as_vector(), t0, t1, opts, raise_on_divergence=False
    )
    trajectory = Trajectory(
        times=times,
        values=values,
        n=sys.n,
        meta=meta,
        diverged=not math.isnan(diverged_at),
        diverged_at=None if math.isnan(diverged_at) else float(diverged_at),
    )
    logger.debug(
        "Integrated %s on [%g, %g]: %d steps, %d rejected",
        sys.name,
        t0,
        t1,
        meta.steps,
        meta.rejected,
    )
    if trajectory.diverged and raise_on_divergence:
        raise DivergenceError(
            trajectory.diverged_at or t0,
            trajectory,
            reason=f"last finite sample t={times[-1]!r}",
        )
    return trajectory


def flow_map(
    sys: SystemDef,
    s0: State,
    t0: float,
    T: float,
    opts: IntegratorOptions | None = None,
) -> State:
    """State at ``t0 + T``; ``T`` may be negative for backward integration"""
    if T == 0:
        return s0
    opts = (opts or IntegratorOptions()).model_copy(update={"n_out": 1})

    def rhs(t: float, v: Vector) -> Vector:
        return rhs_vector(sys, t, v)

    values = integrate_vector(rhs, s0.as_vector(), t0, t0 + T, opts).values
    return State.from_vector(values[-1])


def trajectory_to_csv(trajectory: Trajectory) -> str:
    """CSV with header ``t,x1..xn,y1..yn,z1..zn[,V]`` and 17 significant digits"""
    n = trajectory.n
    columns = ["t", *(f"{p}{i}" for p in "xyz" for i in range(1, n + 1))]
    data = np.column_stack([trajectory.times, trajectory.values])
    if trajectory.v_series is not None:
        columns.append("V")
        data = np.column_stack([data, trajectory.v_series])

    buffer = io.StringIO()
    np.savetxt(buffer, data, fmt="%.17g", delimiter=",", header=",".join(columns), comments="")
    return buffer.getvalue()
