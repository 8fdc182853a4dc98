"""Spectral constants over a domain box and the theorem's hypothesis checks.

The theorem quantifies over all of R^n; here every bound is a min/max over a
tensor grid plus seeded uniform samples inside a user-given box. Each report
states the box it was computed on.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing_extensions import Self

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import InputError, LyapcertError, PreconditionError, SamplingError
from .linalg import SymMatrix, commutator_norm, sym_eigenvalues
from .system import SystemDef, Vector, secant_operator

logger = logging.getLogger(__name__)

MAX_GRID_POINTS = 1_000_000
MAX_PAIR_SECANTS = 256
MAX_COMMUTATION_POINTS = 2_000
H_ZERO_TOL = 1e-12
PERIODICITY_TOL = 1e-9
COMMUTATION_TOL = 1e-9
STATE_INDEPENDENCE_TOL = 1e-12


@dataclass(frozen=True, slots=True, eq=False)
class DomainBox:
    """Axis-aligned sampling box over (X, Y, Z) in R^{3n}"""

    lower: Vector
    upper: Vector
    m: int = 5
    r: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        lower = np.asarray(self.lower, dtype=np.float64).reshape(-1)
        upper = np.asarray(self.upper, dtype=np.float64).reshape(-1)
        if lower.shape != upper.shape or lower.size % 3:
            raise InputError("Box bounds must be two vectors of equal length 3n")
        if not np.all(lower < upper):
            raise InputError("Box requires lower < upper on every axis")
        if self.m < 2:
            raise InputError(f"Grid needs at least 2 points per axis, got {self.m}")
        if self.r < 0:
            raise InputError(f"Random sample count must be non-negative, got {self.r}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def symmetric(
        cls, n: int, radius: float, m: int = 5, r: int = 0, seed: int = 0
    ) -> Self:
        """Box |coordinate| <= radius on all 3n axes"""
        if radius <= 0:
            raise InputError(f"Box radius must be positive, got {radius}")
        return cls(np.full(3 * n, -radius), np.full(3 * n, radius), m, r, seed)

    @property
    def n(self) -> int:
        return self.lower.size // 3

    def grid(self, dims: int, m: int) -> NDArray[np.float64]:
        """Tensor grid over the first ``dims`` axes"""
        axes = [np.linspace(lo, hi, m) for lo, hi in zip(self.lower[:dims], self.upper[:dims])]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dims)

    def random_points(self) -> NDArray[np.float64]:
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.lower, self.upper, size=(self.r, self.lower.size))

    def capped_m(self, dims: int) -> int:
        """Largest grid size <= m with m**dims inside the global cap (0 = no grid)"""
        m = self.m
        while m >= 2 and m**dims > MAX_GRID_POINTS:
            m -= 1
        if m != self.m:
            logger.warning(
                "Grid of %d^%d points exceeds cap; using %d per axis", self.m, dims, m
            )
        return m if m >= 2 else 0

    def points(self, dims: int) -> tuple[NDArray[np.float64], int]:
        """Grid (capped) plus random points, projected on the first ``dims`` axes"""
        m = self.capped_m(dims)
        grid = (
            self.grid(dims, m)
            if m
            else (0.5 * (self.lower + self.upper))[None, :dims]
        )
        return np.vstack([grid, self.random_points()[:, :dims]]), m


@dataclass(frozen=True, slots=True, eq=False)
class SampleRecord:
    point: Vector
    f_eigenvalues: tuple[float, ...]
    g_eigenvalues: tuple[float, ...]


@dataclass(frozen=True, slots=True)
class SpectralBounds:
    """Spectral constants of the theorem extracted over a box"""

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
    sample_count: int
    grid_points_per_axis: int
    box_lower: tuple[float, ...]
    box_upper: tuple[float, ...]
    box_random: int
    seed: int
    samples: tuple[SampleRecord, ...] = field(default=(), compare=False, repr=False)

    @property
    def binding_secant_cap(self) -> str:
        return "first" if self.secant_cap_first <= self.secant_cap_second else "second"


@dataclass(frozen=True, slots=True)
class ConditionVerdict:
    """One inequality, its numeric sides and its outcome as stated"""

    name: str
    relation: str
    lhs: float
    rhs: float
    holds: bool
    non_strict_holds: bool
    required: bool = True


@dataclass(frozen=True, slots=True)
class ConditionReport:
    verdicts: tuple[ConditionVerdict, ...]

    @property
    def holds(self) -> bool:
        return all(v.holds for v in self.verdicts if v.required)

    @property
    def failed(self) -> list[str]:
        return [v.name for v in self.verdicts if v.required and not v.holds]

    def verdict(self, name: str) -> ConditionVerdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)


@dataclass(frozen=True, slots=True)
class ForcingBound:
    """Linear-growth envelope of ||P|| and its Euclidean-norm variant"""

    delta_0: float
    delta_1: float
    theta1_max: float
    theta2_max: float
    sample_count: int


# =============================================================================
# SAMPLING HELPERS
# =============================================================================


@dataclass(slots=True)
class _Extremes:
    lo: float = math.inf
    hi: float = -math.inf

    def update(self, values: Sequence[float]) -> None:
        self.lo = min(self.lo, *values)
        self.hi = max(self.hi, *values)

    def merge(self, other: _Extremes) -> None:
        self.lo = min(self.lo, other.lo)
        self.hi = max(self.hi, other.hi)


def _eigs(matrix: ArrayLike, point: ArrayLike) -> tuple[float, ...]:
    try:
        return sym_eigenvalues(SymMatrix.from_array(matrix)).values
    except LyapcertError as exc:
        raise SamplingError(np.asarray(point).tolist(), exc) from exc


def _relative_commutator(q: SymMatrix, d: SymMatrix) -> float:
    scale = q.frobenius * d.frobenius
    return commutator_norm(q, d) / scale if scale > 0 else 0.0


def _chunks(points: NDArray[np.float64], count: int) -> Iterator[NDArray[np.float64]]:
    yield from (c for c in np.array_split(points, max(1, count)) if len(c))


def _scan_f(
    sys: SystemDef, chunk: NDArray[np.float64], record: bool
) -> tuple[_Extremes, _Extremes, float, list[tuple[Vector, tuple[float, ...]]]]:
    n = sys.n
    f_ext, fa_ext = _Extremes(), _Extremes()
    worst_fg = 0.0
    records = []
    for point in chunk:
        X, Y, Z = point[:n], point[n : 2 * n], point[2 * n :]
        f = sys.f_matrix(X, Y, Z)
        f_eigs = _eigs(f, point)
        f_ext.update(f_eigs)
        fa_ext.update(_eigs(f - sys.A.entries, point))
        g_sym = SymMatrix.symmetrized(sys.g_matrix(X, Y))
        worst_fg = max(worst_fg, _relative_commutator(SymMatrix.symmetrized(f), g_sym))
        if record:
            records.append((point.copy(), f_eigs))
    return f_ext, fa_ext, worst_fg, records


def _scan_g(
    sys: SystemDef, chunk: NDArray[np.float64]
) -> tuple[_Extremes, _Extremes, dict[bytes, tuple[float, ...]]]:
    n = sys.n
    g_ext, gb_ext = _Extremes(), _Extremes()
    by_point: dict[bytes, tuple[float, ...]] = {}
    for point in chunk:
        g = sys.g_matrix(point[:n], point[n:])
        g_eigs = _eigs(g, point)
        by_point[point.tobytes()] = g_eigs
        g_ext.update(g_eigs)
        gb_ext.update(_eigs(g - sys.B.entries, point))
    return g_ext, gb_ext, by_point


def _scan_secant(sys: SystemDef, pairs: NDArray[np.float64]) -> _Extremes:
    n = sys.n
    ext = _Extremes()
    for pair in pairs:
        try:
            op = secant_operator(sys, pair[:n], pair[n:])
        except LyapcertError as exc:
            raise SamplingError(pair.tolist(), exc) from exc
        ext.update(_eigs(op.sym.entries, pair))
    return ext


def _secant_pairs(box: DomainBox, x_points: NDArray[np.float64]) -> NDArray[np.float64]:
    """One-sided pairs (X, 0) for every X plus seeded random pairs (X, X')"""
    n = box.n
    one_sided = np.hstack([x_points, np.zeros_like(x_points)])
    rng = np.random.default_rng(box.seed + 1)
    randoms = box.random_points()[:, :n]
    if len(randoms) >= 2:
        pairs = np.hstack([randoms[:-1], randoms[1:]])
    else:
        order = rng.permutation(len(x_points))
        pairs = np.hstack([x_points, x_points[order]])
    pairs = pairs[np.any(pairs[:, :n] != pairs[:, n:], axis=1)][:MAX_PAIR_SECANTS]
    return np.vstack([one_sided, pairs])


def _commutation_with_secant(
    sys: SystemDef, points: NDArray[np.float64]
) -> tuple[float, float]:
    n = sys.n
    stride = max(1, len(points) // MAX_COMMUTATION_POINTS)
    worst_f = worst_g = 0.0
    cache: dict[bytes, SymMatrix] = {}
    for point in points[::stride]:
        X, Y, Z = point[:n], point[n : 2 * n], point[2 * n :]
        key = X.tobytes()
        if (sec := cache.get(key)) is None:
            sec = cache[key] = secant_operator(sys, X, np.zeros(n)).sym
        f = SymMatrix.symmetrized(sys.f_matrix(X, Y, Z))
        g = SymMatrix.symmetrized(sys.g_matrix(X, Y))
        worst_f = max(worst_f, _relative_commutator(f, sec))
        worst_g = max(worst_g, _relative_commutator(g, sec))
    return worst_f, worst_g


def forcing_period_error(sys: SystemDef, points: NDArray[np.float64], t_samples: int = 8) -> float:
    """Max ||P(t + omega, s) - P(t, s)|| over the given points and phases"""
    n = sys.n
    worst = 0.0
    stride = max(1, len(points) // MAX_COMMUTATION_POINTS)
    for t in np.linspace(0.0, sys.omega, t_samples, endpoint=False):
        for point in points[::stride]:
            X, Y, Z = point[:n], point[n : 2 * n], point[2 * n :]
            diff = sys.p_vector(t + sys.omega, X, Y, Z) - sys.p_vector(t, X, Y, Z)
            worst = max(worst, float(np.linalg.norm(diff)))
    return worst


def _safe_ratio(num: float, den: float) -> float:
    return num / den if den > 0 else math.inf


def k_constants(delta_a: float, Delta_a: float, delta_b: float) -> tuple[float, float]:
    """(k as stated in the hypothesis, k as derived in the proof = k/8)"""
    k = min(0.5, _safe_ratio(delta_b, delta_a * Delta_a))
    return k, k / 8.0


def sqrt_eps_budget(
    delta_a: float, Delta_a: float, delta_b: float, Delta_b: float, delta_h: float
) -> float:
    return min(
        _safe_ratio(delta_b * delta_h, 4.0 * Delta_b + 4.0),
        _safe_ratio(delta_a * delta_b, 6.0 * Delta_a + 7.0),
        delta_a / 2.0,
        1.0,
    )


# =============================================================================
# OPERATIONS
# =============================================================================


def spectral_bounds(
    sys: SystemDef,
    box: DomainBox,
    record_samples: bool = False,
    workers: int = 1,
) -> SpectralBounds:
    """Extract delta/Delta constants for A/F, B/G and the secant operator.

    F is sampled on the full 3n-dimensional grid, G on the (X, Y) grid and the
    secant operator on the X grid plus random pairs. Chunks are scanned in a
    thread pool and reduced by min/max, so the result does not depend on the
    scheduling order.
    """
    if box.n != sys.n:
        raise InputError(f"Box dimension {box.n} does not match system {sys.n}")
    n = sys.n

    f_points, m_eff = box.points(3 * n)
    g_points, _ = box.points(2 * n)
    x_points, _ = box.points(n)
    pairs = _secant_pairs(box, x_points)
    logger.info(
        "Sampling %s: %d F points, %d G points, %d secants",
        sys.name,
        len(f_points),
        len(g_points),
        len(pairs),
    )

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        f_parts = list(pool.map(lambda c: _scan_f(sys, c, record_samples), _chunks(f_points, workers)))
        g_parts = list(pool.map(lambda c: _scan_g(sys, c), _chunks(g_points, workers)))
        h_parts = list(pool.map(lambda c: _scan_secant(sys, c), _chunks(pairs, workers)))

    f_ext, fa_ext, h_ext = _Extremes(), _Extremes(), _Extremes()
    g_ext, gb_ext = _Extremes(), _Extremes()
    worst_fg = 0.0
    records: list[tuple[Vector, tuple[float, ...]]] = []
    g_lookup: dict[bytes, tuple[float, ...]] = {}
    for f_part, fa_part, fg, recs in f_parts:
        f_ext.merge(f_part)
        fa_ext.merge(fa_part)
        worst_fg = max(worst_fg, fg)
        records.extend(recs)
    for g_part, gb_part, lookup in g_parts:
        g_ext.merge(g_part)
        gb_ext.merge(gb_part)
        g_lookup.update(lookup)
    for part in h_parts:
        h_ext.merge(part)

    a_spec = sym_eigenvalues(sys.A)
    b_spec = sym_eigenvalues(sys.B)
    delta_a, Delta_a = min(a_spec.min, f_ext.lo), max(a_spec.max, f_ext.hi)
    delta_b, Delta_b = min(b_spec.min, g_ext.lo), max(b_spec.max, g_ext.hi)
    delta_h, Delta_h = h_ext.lo, h_ext.hi
    k_printed, k_proof = k_constants(delta_a, Delta_a, delta_b)

    comm_f, comm_g = _commutation_with_secant(sys, f_points)
    samples = tuple(
        SampleRecord(
            point=point,
            f_eigenvalues=f_eigs,
            g_eigenvalues=g_lookup.get(point[: 2 * n].tobytes())
            or _eigs(sys.g_matrix(point[:n], point[n : 2 * n]), point),
        )
        for point, f_eigs in records
    )

    return SpectralBounds(
        delta_a=delta_a,
        Delta_a=Delta_a,
        delta_b=delta_b,
        Delta_b=Delta_b,
        delta_h=delta_h,
        Delta_h=Delta_h,
        k_printed=k_printed,
        k_proof=k_proof,
        sqrt_eps_budget=sqrt_eps_budget(delta_a, Delta_a, delta_b, Delta_b, delta_h),
        eps=sys.eps,
        f_min=f_ext.lo,
        f_max=f_ext.hi,
        g_min=g_ext.lo,
        g_max=g_ext.hi,
        f_minus_a_min=fa_ext.lo,
        f_minus_a_max=fa_ext.hi,
        g_minus_b_min=gb_ext.lo,
        g_minus_b_max=gb_ext.hi,
        h_zero_norm=float(np.linalg.norm(sys.h_vector(np.zeros(n)))),
        commutator_f_g=worst_fg,
        commutator_f_secant=comm_f,
        commutator_g_secant=comm_g,
        forcing_period_error=forcing_period_error(sys, f_points),
        secant_cap_first=_safe_ratio(delta_b**2, 8.0 * Delta_a),
        secant_cap_second=delta_a * delta_b / 16.0,
        sample_count=len(f_points) + len(g_points) + len(pairs),
        grid_points_per_axis=m_eff,
        box_lower=tuple(box.lower.tolist()),
        box_upper=tuple(box.upper.tolist()),
        box_random=box.r,
        seed=box.seed,
        samples=samples,
    )


def _verdict(
    name: str, lhs: float, relation: str, rhs: float, required: bool = True
) -> ConditionVerdict:
    match relation:
        case "<":
            holds, non_strict = lhs < rhs, lhs <= rhs
        case "<=":
            holds = non_strict = lhs <= rhs
        case _:
            raise ValueError(f"Unsupported relation {relation!r}")
    return ConditionVerdict(name, relation, lhs, rhs, holds, non_strict, required)


def check_theorem_conditions(bounds: SpectralBounds) -> ConditionReport:
    """Independent pass/fail for every hypothesis; strict forms are checked with
    zero slack, and the overall verdict uses the proof's constant k."""
    b = bounds
    sqrt_eps = math.sqrt(b.eps) if b.eps > 0 else 0.0
    product = b.delta_a * b.delta_b
    return ConditionReport(
        (
            _verdict("h_vanishes_at_origin", b.h_zero_norm, "<=", H_ZERO_TOL),
            _verdict("damping_positive", 0.0, "<", b.delta_a),
            _verdict("stiffness_positive", 0.0, "<", b.delta_b),
            _verdict("secant_positive", 0.0, "<", b.delta_h),
            _verdict("secant_bound_stated_k", b.Delta_h, "<=", b.k_printed * product, required=False),
            _verdict("secant_bound_proof_k", b.Delta_h, "<=", b.k_proof * product),
            _verdict("damping_sandwich_lower", 0.0, "<", b.f_minus_a_min),
            _verdict("damping_sandwich_upper", b.f_minus_a_max, "<=", sqrt_eps / 2.0),
            _verdict("stiffness_sandwich_lower", 0.0, "<", b.g_minus_b_min),
            _verdict("stiffness_sandwich_upper", b.g_minus_b_max, "<=", sqrt_eps / 2.0),
            _verdict("eps_positive", 0.0, "<", b.eps),
            _verdict("eps_at_most_one", b.eps, "<=", 1.0),
            _verdict("eps_within_budget", sqrt_eps, "<=", b.sqrt_eps_budget),
            _verdict("f_commutes_with_g", b.commutator_f_g, "<=", COMMUTATION_TOL),
            _verdict("f_commutes_with_secant", b.commutator_f_secant, "<=", COMMUTATION_TOL),
            _verdict("g_commutes_with_secant", b.commutator_g_secant, "<=", COMMUTATION_TOL),
            _verdict("forcing_periodic", b.forcing_period_error, "<=", PERIODICITY_TOL),
        )
    )


def forcing_bound_fit(sys: SystemDef, box: DomainBox, t_samples: int = 16) -> ForcingBound:
    """Least linear-growth envelope of ||P|| over the box and one period.

    First pass: delta_0 (and theta1_max) = max_t ||P(t, 0, 0, 0)||. Second
    pass: the smallest slope that covers every sample whose growth variable
    (sum of norms, resp. Euclidean norm) is at least one.
    """
    if t_samples < 2:
        raise InputError(f"Need at least 2 time samples, got {t_samples}")
    n = sys.n
    times = np.linspace(0.0, sys.omega, t_samples, endpoint=False)
    zero = np.zeros(n)
    delta_0 = max(float(np.linalg.norm(sys.p_vector(t, zero, zero, zero))) for t in times)

    points, _ = box.points(3 * n)
    delta_1 = theta2 = 0.0
    for point in points:
        X, Y, Z = point[:n], point[n : 2 * n], point[2 * n :]
        linear = float(np.linalg.norm(X) + np.linalg.norm(Y) + np.linalg.norm(Z))
        euclid = float(np.linalg.norm(point))
        p_max = max(float(np.linalg.norm(sys.p_vector(t, X, Y, Z))) for t in times)
        if linear >= 1.0:
            delta_1 = max(delta_1, (p_max - delta_0) / linear)
        if euclid >= 1.0:
            theta2 = max(theta2, (p_max - delta_0) / euclid)

    return ForcingBound(
        delta_0=delta_0,
        delta_1=delta_1,
        theta1_max=delta_0,
        theta2_max=theta2,
        sample_count=len(points) * t_samples,
    )


def forcing_is_state_independent(
    sys: SystemDef, samples: int = 32, radius: float = 1.0, seed: int = 0
) -> bool:
    """Sample P at fixed phases with varying states and compare to P(t, 0)"""
    n = sys.n
    rng = np.random.default_rng(seed)
    zero = np.zeros(n)
    for t in np.linspace(0.0, sys.omega, 8, endpoint=False):
        base = sys.p_vector(t, zero, zero, zero)
        for _ in range(samples):
            X, Y, Z = rng.uniform(-radius, radius, size=(3, n))
            diff = float(np.linalg.norm(sys.p_vector(t, X, Y, Z) - base))
            if diff > STATE_INDEPENDENCE_TOL * (1.0 + float(np.linalg.norm(base))):
                return False
    return True


def require_state_independent_forcing(sys: SystemDef) -> None:
    if not forcing_is_state_independent(sys):
        raise PreconditionError(
            f"Forcing of {sys.name} depends on the state; the uniqueness branch "
            "needs P = P(t)"
        )
