"""Periodic solutions by Newton shooting, difference decay and ultimate bounds"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import stats

from ..errors import (
    InputError,
    NumericalError,
    PreconditionError,
    SingularJacobianError,
)
from .integrate import IntegratorOptions, integrate, integrate_vector
from .lyapunov import v_value
from .system import (
    State,
    SystemDef,
    Vector,
    paired_difference_trajectory,
    rhs_vector,
)

logger = logging.getLogger(__name__)

STEPS_PER_PERIOD = 512
FD_STEP = 1e-6
MAX_CONDITION = 1e12
LINE_SEARCH_HALVINGS = 8
DISTINCT_TOL = 1e-6
DIFFERENCE_FLOOR = 1e-13
MIN_FIT_POINTS = 8
NOISE_RTOL_FACTOR = 100.0
CONTRACTION_R2 = 0.9


@dataclass(frozen=True, slots=True, eq=False)
class OrbitResult:
    s_star: State
    residual: float
    newton_iters: int
    converged: bool
    tolerance: float
    floquet_spectrum_radius: float | None = None


@dataclass(frozen=True, slots=True)
class PeriodicityCheck:
    mismatch: float
    tolerance: float
    samples: int

    @property
    def passes(self) -> bool:
        return self.mismatch <= self.tolerance


@dataclass(frozen=True, slots=True, eq=False)
class MultistartResult:
    orbits: tuple[OrbitResult, ...]
    attempts: int
    failures: int


@dataclass(frozen=True, slots=True)
class DecayFit:
    """Least-squares fit of log||difference|| = log K - delta·t on a tail window"""

    K_fit: float
    delta_fit: float
    fit_window: tuple[float, float]
    r_squared: float
    degenerate: bool = False
    non_contracting: bool = False
    floor_reached: bool = False
    v_delta_fit: float = math.nan
    window_deltas: tuple[float, float] = (math.nan, math.nan)


@dataclass(frozen=True, slots=True)
class BoundEstimate:
    Delta_1_est: float
    horizon: float
    start_count: int
    diverged_count: int
    tail_fraction: float = 0.25
    diverged_at: tuple[float, ...] = field(default=())


# =============================================================================
# SHOOTING
# =============================================================================


def _shooting_options(sys: SystemDef, steps_per_period: int) -> IntegratorOptions:
    return IntegratorOptions(method="rk4", h=sys.omega / steps_per_period, n_out=1)


def _period_map(sys: SystemDef, v: Vector, opts: IntegratorOptions) -> Vector:
    def rhs(t: float, y: Vector) -> Vector:
        return rhs_vector(sys, t, y)

    return integrate_vector(rhs, v, 0.0, sys.omega, opts).values[-1]


def _period_map_jacobian(
    sys: SystemDef, v: Vector, image: Vector, opts: IntegratorOptions
) -> NDArray[np.float64]:
    """Forward differences of the period map, step 1e-6·(1 + ||v||)"""
    h = FD_STEP * (1.0 + float(np.linalg.norm(v)))
    jac = np.empty((v.size, v.size))
    for j in range(v.size):
        shifted = v.copy()
        shifted[j] += h
        jac[:, j] = (_period_map(sys, shifted, opts) - image) / h
    return jac


def find_periodic(
    sys: SystemDef,
    guess: State,
    tol: float = 1e-10,
    max_iters: int = 50,
    steps_per_period: int = STEPS_PER_PERIOD,
    floquet: bool = True,
) -> OrbitResult:
    """Newton iteration on g(s) = Φ_ω(s) - s with a halving line search.

    Φ_ω is the RK4 period map with a fixed number of steps per period, so it
    is a smooth function of the start and the Newton residual can be driven
    to round-off.
    """
    if tol <= 0:
        raise InputError(f"Shooting tolerance must be positive, got {tol}")
    if guess.n != sys.n:
        raise InputError(f"Guess dimension {guess.n} does not match system {sys.n}")

    opts = _shooting_options(sys, steps_per_period)
    v = guess.as_vector()
    image = _period_map(sys, v, opts)
    g = image - v
    residual = float(np.linalg.norm(g))
    iters = 0

    while residual > tol and iters < max_iters:
        jac_phi = _period_map_jacobian(sys, v, image, opts)
        jac = jac_phi - np.eye(v.size)
        if (condition := float(np.linalg.cond(jac))) > MAX_CONDITION:
            raise SingularJacobianError(condition)
        step = np.linalg.solve(jac, -g)
        iters += 1

        scale = 1.0
        for _ in range(LINE_SEARCH_HALVINGS + 1):
            trial = v + scale * step
            trial_image = _period_map(sys, trial, opts)
            trial_g = trial_image - trial
            if (trial_residual := float(np.linalg.norm(trial_g))) < residual:
                break
            scale *= 0.5
        else:
            logger.info("Line search stalled at residual %.3e", residual)
            break

        v, image, g, residual = trial, trial_image, trial_g, trial_residual
        logger.debug("Newton iteration %d: residual %.3e", iters, residual)

    radius = None
    if floquet:
        jac_phi = _period_map_jacobian(sys, v, image, opts)
        radius = float(np.linalg.svd(jac_phi, compute_uv=False)[0])

    converged = residual <= tol
    logger.info(
        "Shooting on %s %s after %d iterations (residual %.3e)",
        sys.name,
        "converged" if converged else "failed",
        iters,
        residual,
    )
    return OrbitResult(
        s_star=State.from_vector(v),
        residual=residual,
        newton_iters=iters,
        converged=converged,
        tolerance=tol,
        floquet_spectrum_radius=radius,
    )


def verify_periodic(
    sys: SystemDef,
    orbit: OrbitResult,
    samples: int = 64,
    steps_per_period: int = STEPS_PER_PERIOD,
) -> PeriodicityCheck:
    """Integrate two periods and compare state(t + ω) with state(t) on a grid"""
    if not orbit.converged:
        raise PreconditionError("Only converged orbits can be verified")
    if samples < 1 or steps_per_period % samples:
        raise InputError(
            f"Sample count {samples} must divide the {steps_per_period} steps per period"
        )
    opts = _shooting_options(sys, steps_per_period).model_copy(update={"n_out": 2 * samples})

    def rhs(t: float, y: Vector) -> Vector:
        return rhs_vector(sys, t, y)

    values = integrate_vector(rhs, orbit.s_star.as_vector(), 0.0, 2.0 * sys.omega, opts).values
    mismatch = float(np.max(np.linalg.norm(values[samples:] - values[: samples + 1], axis=1)))
    return PeriodicityCheck(mismatch=mismatch, tolerance=10.0 * orbit.tolerance, samples=samples)


def random_ball_states(n: int, count: int, radius: float, seed: int) -> list[State]:
    """Seeded states uniform in the Euclidean ball of R^{3n}"""
    rng = np.random.default_rng(seed)
    dim = 3 * n
    directions = rng.standard_normal((count, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.uniform(size=count) ** (1.0 / dim)
    return [State.from_vector(d * r) for d, r in zip(directions, radii)]


def multistart_periodic(
    sys: SystemDef,
    starts: int = 16,
    radius: float = 1.0,
    seed: int = 0,
    tol: float = 1e-10,
    max_iters: int = 50,
    workers: int = 1,
) -> MultistartResult:
    """Shoot from seeded random guesses and keep every distinct converged orbit"""
    guesses = random_ball_states(sys.n, starts, radius, seed)

    def attempt(guess: State) -> OrbitResult | None:
        try:
            return find_periodic(sys, guess, tol, max_iters, floquet=False)
        except NumericalError as exc:
            logger.info("Multistart guess failed: %s", exc)
            return None

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(attempt, guesses))

    distinct: list[OrbitResult] = []
    for result in results:
        if result is None or not result.converged:
            continue
        point = result.s_star.as_vector()
        if all(np.linalg.norm(point - o.s_star.as_vector()) > DISTINCT_TOL for o in distinct):
            distinct.append(result)

    failures = sum(1 for r in results if r is None or not r.converged)
    return MultistartResult(orbits=tuple(distinct), attempts=starts, failures=failures)


# =============================================================================
# UNIQUENESS AND BOUNDEDNESS
# =============================================================================


def _fit(times: Vector, values: Vector) -> tuple[float, float, float]:
    """(K, delta, r²) from a least-squares line through log(values)"""
    fit = stats.linregress(times, np.log(values))
    return math.exp(fit.intercept), -fit.slope, fit.rvalue**2


def _window(times: Vector, start: float, end: float) -> NDArray[np.bool_]:
    return (times >= start) & (times <= end)


def uniqueness_decay(
    sys: SystemDef,
    s1: State,
    s2: State,
    horizon: float = 30.0,
    fit_window_fraction: float = 0.5,
    steps: int = 600,
    opts: IntegratorOptions | None = None,
) -> DecayFit:
    if not 0 < fit_window_fraction <= 1:
        raise InputError(f"Fit window fraction must lie in (0, 1], got {fit_window_fraction}")
    if horizon <= 0:
        raise InputError(f"Horizon must be positive, got {horizon}")
    if np.array_equal(s1.as_vector(), s2.as_vector()):
        logger.info("Identical starts: difference vanishes identically")
        return DecayFit(math.nan, math.nan, (0.0, horizon), math.nan, degenerate=True)

    opts = opts or IntegratorOptions(rtol=1e-11, atol=1e-15)
    series = paired_difference_trajectory(sys, s1, s2, horizon, steps, opts=opts)
    floor = max(DIFFERENCE_FLOOR, NOISE_RTOL_FACTOR * opts.rtol * series.scale)
    if series.norms[0] <= floor:
        logger.info("Initial difference %.3g is below the noise floor", series.norms[0])
        return DecayFit(math.nan, math.nan, (0.0, horizon), math.nan, degenerate=True)

    end = horizon
    below = series.norms <= floor
    floor_reached = bool(np.any(below))
    if floor_reached:
        end = float(series.times[np.argmax(below)])
        start = end * (1.0 - fit_window_fraction)
        kept = _window(series.times, start, end) & ~below
        logger.info("Difference reached the noise floor %.3g at t=%.4g", floor, end)
        if int(kept.sum()) < MIN_FIT_POINTS:
            # resample the decaying stretch on the same number of steps
            series = paired_difference_trajectory(sys, s1, s2, end, steps, opts=opts)

    times, norms = series.times, series.norms
    start = end * (1.0 - fit_window_fraction)
    mask = _window(times, start, end) & (norms > floor)
    count = int(mask.sum())
    if count < 2:
        logger.warning("Only %d samples above the noise floor; no rate fitted", count)
        return DecayFit(math.nan, math.nan, (start, end), math.nan, floor_reached=floor_reached)

    K, delta, r2 = _fit(times[mask], norms[mask])
    if count < MIN_FIT_POINTS:
        logger.warning("Rate fitted on %d samples only", count)

    midpoint = 0.5 * (start + end)
    halves = []
    for lo, hi in ((start, midpoint), (midpoint, end)):
        sub = _window(times, lo, hi) & (norms > floor)
        halves.append(_fit(times[sub], norms[sub])[1] if sub.sum() >= 3 else math.nan)

    v_series = np.array(
        [v_value(sys.A, sys.B, State.from_vector(d)) for d in series.differences[mask]]
    )
    v_delta = (
        _fit(times[mask], np.sqrt(v_series))[1] if np.all(v_series > 0) else math.nan
    )

    return DecayFit(
        K_fit=K,
        delta_fit=delta,
        fit_window=(float(times[mask][0]), float(times[mask][-1])),
        r_squared=r2,
        non_contracting=delta <= 0 or (count >= MIN_FIT_POINTS and r2 < CONTRACTION_R2),
        floor_reached=floor_reached,
        v_delta_fit=v_delta,
        window_deltas=(halves[0], halves[1]),
    )


def ultimate_bound(
    sys: SystemDef,
    starts: list[State],
    horizon: float,
    tail_fraction: float = 0.25,
    opts: IntegratorOptions | None = None,
    workers: int = 1,
) -> BoundEstimate:
    """Tail supremum of ||s||² over every run that stayed bounded"""
    if horizon <= 0:
        raise InputError(f"Horizon must be positive, got {horizon}")
    if not starts:
        raise InputError("Need at least one start")
    if not 0 < tail_fraction <= 1:
        raise InputError(f"Tail fraction must lie in (0, 1], got {tail_fraction}")
    opts = opts or IntegratorOptions(rtol=1e-6, atol=1e-9, n_out=400)
    tail_start = (1.0 - tail_fraction) * horizon

    def run(start: State) -> tuple[float, float | None]:
        try:
            trajectory = integrate(sys, start, 0.0, horizon, opts, raise_on_divergence=False)
        except NumericalError as exc:
            logger.warning("Bound run failed: %s", exc)
            return math.nan, getattr(exc, "time", math.nan)
        if trajectory.diverged:
            return math.nan, trajectory.diverged_at
        tail = trajectory.times >= tail_start
        return float(np.max(trajectory.norm_sq[tail])), None

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        outcomes = list(pool.map(run, starts))

    sups = [sup for sup, when in outcomes if when is None]
    diverged = tuple(float(when) for _, when in outcomes if when is not None)
    if diverged:
        logger.warning("%d of %d runs diverged", len(diverged), len(starts))
    return BoundEstimate(
        Delta_1_est=max(sups) if sups else math.nan,
        horizon=horizon,
        start_count=len(starts),
        diverged_count=len(diverged),
        tail_fraction=tail_fraction,
        diverged_at=diverged,
    )
