"""Dense symmetric-matrix arithmetic, eigenvalues and quadratic-form bounds"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing_extensions import Self

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import DimensionError, InputError, PreconditionError

logger = logging.getLogger(__name__)

JACOBI_MAX_SWEEPS = 30
JACOBI_THRESHOLD = 1e-14
SYMMETRY_RTOL = 1e-9
COMMUTATION_RTOL = 1e-9


@dataclass(frozen=True, slots=True, eq=False)
class SymMatrix:
    """Real symmetric n×n matrix, symmetrized and frozen on construction"""

    entries: NDArray[np.float64]

    @classmethod
    def from_array(cls, values: ArrayLike, rtol: float = SYMMETRY_RTOL) -> Self:
        """Validate squareness, finiteness and symmetry, then symmetrize"""
        arr = np.array(values, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise DimensionError(f"Expected a non-empty square matrix, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InputError("Matrix has non-finite entries")

        scale = max(1.0, float(np.max(np.abs(arr))))
        if (asym := float(np.max(np.abs(arr - arr.T)))) > rtol * scale:
            raise InputError(f"Matrix is not symmetric (max |M - M^T| = {asym:.3e})")
        return cls.symmetrized(arr)

    @classmethod
    def symmetrized(cls, values: ArrayLike) -> Self:
        """Take the symmetric part (M + M^T)/2 without an asymmetry check"""
        arr = np.array(values, dtype=np.float64)
        sym = 0.5 * (arr + arr.T)
        sym.flags.writeable = False
        return cls(sym)

    @classmethod
    def identity(cls, n: int) -> Self:
        return cls.symmetrized(np.eye(n))

    @classmethod
    def diag(cls, values: ArrayLike) -> Self:
        return cls.from_array(np.diag(np.asarray(values, dtype=np.float64)))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def frobenius(self) -> float:
        return float(np.linalg.norm(self.entries))

    def __add__(self, other: SymMatrix) -> SymMatrix:
        _require_same_dim(self, other)
        return SymMatrix.symmetrized(self.entries + other.entries)

    def __sub__(self, other: SymMatrix) -> SymMatrix:
        _require_same_dim(self, other)
        return SymMatrix.symmetrized(self.entries - other.entries)

    def scaled(self, factor: float) -> SymMatrix:
        return SymMatrix.symmetrized(factor * self.entries)

    def shifted(self, shift: float) -> SymMatrix:
        """Return M + shift·I"""
        return SymMatrix.symmetrized(self.entries + shift * np.eye(self.n))

    def tolist(self) -> list[list[float]]:
        return self.entries.tolist()


@dataclass(frozen=True, slots=True)
class Spectrum:
    """Eigenvalues of a symmetric matrix in ascending order"""

    values: tuple[float, ...]

    @property
    def min(self) -> float:
        return self.values[0]

    @property
    def max(self) -> float:
        return self.values[-1]

    @property
    def trace(self) -> float:
        return math.fsum(self.values)

    @property
    def determinant(self) -> float:
        return math.prod(self.values)


@dataclass(frozen=True, slots=True)
class LemmaReport:
    """Outcome of the product/sum eigenvalue inclusion checks"""

    commutator: float
    product_eigenvalues: tuple[float, ...]
    product_lower: float
    product_upper: float
    product_holds: bool
    sum_eigenvalues: tuple[float, ...]
    sum_lower: float
    sum_upper: float
    sum_holds: bool

    @property
    def holds(self) -> bool:
        return self.product_holds and self.sum_holds


def _require_same_dim(a: SymMatrix, b: SymMatrix) -> None:
    if a.n != b.n:
        raise DimensionError(f"Dimension mismatch: {a.n} vs {b.n}")


def sym_eigenvalues(m: SymMatrix) -> Spectrum:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over the strict upper triangle annihilating each pivot with the
    stable tangent formula, until the off-diagonal Frobenius norm drops
    below ``JACOBI_THRESHOLD * ||M||_F`` or ``JACOBI_MAX_SWEEPS`` is spent.
    """
    a = np.array(m.entries, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise InputError("Matrix has non-finite entries")

    n = a.shape[0]
    target = JACOBI_THRESHOLD * float(np.linalg.norm(a))
    off_mask = ~np.eye(n, dtype=bool)

    for sweep in range(JACOBI_MAX_SWEEPS):
        if float(np.sqrt(np.sum(a[off_mask] ** 2))) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if (apq := a[p, q]) == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    else:
        logger.warning(
            "Jacobi did not reach threshold after %d sweeps (n=%d)",
            JACOBI_MAX_SWEEPS,
            n,
        )

    return Spectrum(tuple(sorted(float(v) for v in np.diag(a))))


def quadratic_form(m: SymMatrix, x: ArrayLike) -> float:
    """Return <Mx, x>"""
    vec = np.asarray(x, dtype=np.float64)
    if vec.shape != (m.n,):
        raise DimensionError(f"Vector of shape {vec.shape} against matrix of size {m.n}")
    return float(vec @ m.entries @ vec)


def quadratic_form_bounded(
    m: SymMatrix, x: ArrayLike, slack: float = 1e-9
) -> bool:
    """Check the Rayleigh sandwich lambda_min||x||² ≤ <Mx,x> ≤ lambda_max||x||²"""
    spectrum = sym_eigenvalues(m)
    vec = np.asarray(x, dtype=np.float64)
    value = quadratic_form(m, vec)
    norm_sq = float(vec @ vec)
    tol = slack * max(1.0, abs(value), norm_sq * max(abs(spectrum.min), abs(spectrum.max)))
    return spectrum.min * norm_sq - tol <= value <= spectrum.max * norm_sq + tol


def commutator_norm(q: SymMatrix, d: SymMatrix) -> float:
    """Frobenius norm of QD - DQ"""
    _require_same_dim(q, d)
    return float(np.linalg.norm(q.entries @ d.entries - d.entries @ q.entries))


def commutes(q: SymMatrix, d: SymMatrix, rtol: float = COMMUTATION_RTOL) -> bool:
    return commutator_norm(q, d) <= rtol * max(q.frobenius * d.frobenius, 1e-300)


def check_lemma_bounds(
    q: SymMatrix, d: SymMatrix, slack: float = 1e-9
) -> LemmaReport:
    """Check the eigenvalue inclusions for the product and sum of commuting Q, D"""
    _require_same_dim(q, d)
    if not commutes(q, d):
        raise PreconditionError(
            f"Q and D do not commute (||QD - DQ||_F = {commutator_norm(q, d):.3e})"
        )

    spec_q = np.array(sym_eigenvalues(q).values)
    spec_d = np.array(sym_eigenvalues(d).values)
    products = np.outer(spec_q, spec_d)

    # QD is symmetric up to the commutator, which is below tolerance here
    qd = sym_eigenvalues(SymMatrix.symmetrized(q.entries @ d.entries))
    qs = sym_eigenvalues(q + d)

    p_lo, p_hi = float(products.min()), float(products.max())
    s_lo = float(spec_q.min() + spec_d.min())
    s_hi = float(spec_q.max() + spec_d.max())
    p_tol = slack * max(1.0, abs(p_lo), abs(p_hi))
    s_tol = slack * max(1.0, abs(s_lo), abs(s_hi))

    return LemmaReport(
        commutator=commutator_norm(q, d),
        product_eigenvalues=qd.values,
        product_lower=p_lo,
        product_upper=p_hi,
        product_holds=all(p_lo - p_tol <= v <= p_hi + p_tol for v in qd.values),
        sum_eigenvalues=qs.values,
        sum_lower=s_lo,
        sum_upper=s_hi,
        sum_holds=all(s_lo - s_tol <= v <= s_hi + s_tol for v in qs.values),
    )
