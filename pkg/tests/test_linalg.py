"""Symmetric matrices, the Jacobi eigen-solver and the quadratic-form bounds"""

import math

import numpy as np
import pytest

from src.core.linalg import (
    SymMatrix,
    check_lemma_bounds,
    commutator_norm,
    commutes,
    quadratic_form,
    quadratic_form_bounded,
    sym_eigenvalues,
)
from src.errors import DimensionError, InputError, PreconditionError
from tests.conftest import random_symmetric


class TestSymMatrix:
    def test_symmetrizes_within_tolerance(self):
        m = SymMatrix.from_array([[1.0, 2.0], [2.0 + 1e-12, 3.0]])
        assert m.entries[0, 1] == m.entries[1, 0]

    def test_rejects_asymmetric(self):
        with pytest.raises(InputError, match="not symmetric"):
            SymMatrix.from_array([[1.0, 2.0], [0.0, 1.0]])

    @pytest.mark.parametrize(
        "values",
        [[[1.0, 2.0, 3.0]], [[1.0, math.nan], [math.nan, 1.0]]],
        ids=["not_square", "non_finite"],
    )
    def test_rejects_invalid(self, values):
        with pytest.raises(InputError):
            SymMatrix.from_array(values)

    def test_arithmetic(self):
        a = SymMatrix.diag([1.0, 2.0])
        b = SymMatrix.identity(2)
        assert np.array_equal((a + b).entries, np.diag([2.0, 3.0]))
        assert np.array_equal((a - b).entries, np.diag([0.0, 1.0]))
        assert np.array_equal(a.shifted(-1.0).entries, np.diag([0.0, 1.0]))
        assert np.array_equal(a.scaled(2.0).entries, np.diag([2.0, 4.0]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            SymMatrix.identity(2) + SymMatrix.identity(3)


class TestEigenvalues:
    @pytest.mark.parametrize(
        "matrix,expected",
        [
            (np.diag([3.0, 1.0, 2.0]), (1.0, 2.0, 3.0)),
            ([[2.0, 1.0], [1.0, 2.0]], (1.0, 3.0)),
        ],
        ids=["diagonal", "two_by_two"],
    )
    def test_known_spectra(self, matrix, expected):
        spectrum = sym_eigenvalues(SymMatrix.from_array(matrix))
        assert spectrum.values == pytest.approx(expected, abs=1e-12)

    def test_random_against_lapack(self, rng):
        for _ in range(50):
            m = random_symmetric(rng, int(rng.integers(1, 6)))
            expected = np.linalg.eigvalsh(m.entries)
            assert sym_eigenvalues(m).values == pytest.approx(expected, abs=1e-9)

    def test_scaling_and_invariants(self, rng):
        m = random_symmetric(rng, 4)
        spectrum = sym_eigenvalues(m)
        scaled = sym_eigenvalues(m.scaled(3.0))
        assert scaled.values == pytest.approx([3.0 * v for v in spectrum.values], rel=1e-12, abs=1e-12)
        assert spectrum.trace == pytest.approx(np.trace(m.entries), abs=1e-9)
        assert spectrum.determinant == pytest.approx(np.linalg.det(m.entries), rel=1e-9, abs=1e-9)
        assert spectrum.min <= spectrum.max


class TestQuadraticForms:
    @pytest.mark.parametrize(
        "matrix,x,expected",
        [(np.eye(2), [1.0, 1.0], 2.0), (np.diag([2.0, 3.0]), [1.0, 1.0], 5.0)],
        ids=["identity", "diagonal"],
    )
    def test_values(self, matrix, x, expected):
        assert quadratic_form(SymMatrix.from_array(matrix), np.array(x)) == expected

    def test_rayleigh_sandwich_on_random_samples(self, rng):
        for _ in range(1000):
            n = int(rng.integers(1, 6))
            assert quadratic_form_bounded(random_symmetric(rng, n), rng.standard_normal(n))

    def test_vector_dimension_checked(self):
        with pytest.raises(DimensionError):
            quadratic_form(SymMatrix.identity(2), np.ones(3))


class TestCommutation:
    def test_identity_and_diagonals_commute(self, rng):
        d = random_symmetric(rng, 3)
        assert commutator_norm(SymMatrix.identity(3), d) == pytest.approx(0.0, abs=1e-12)
        assert commutator_norm(SymMatrix.diag([1.0, 2.0]), SymMatrix.diag([5.0, -1.0])) == 0.0

    def test_pauli_pair(self):
        q = SymMatrix.from_array([[0.0, 1.0], [1.0, 0.0]])
        d = SymMatrix.from_array([[1.0, 0.0], [0.0, -1.0]])
        assert commutator_norm(q, d) == pytest.approx(2.0 * math.sqrt(2.0))
        assert not commutes(q, d)


class TestLemmaBounds:
    def test_identity_pair(self):
        report = check_lemma_bounds(SymMatrix.identity(2), SymMatrix.identity(2))
        assert (report.product_lower, report.product_upper) == (1.0, 1.0)
        assert (report.sum_lower, report.sum_upper) == (2.0, 2.0)
        assert report.holds

    def test_diagonal_pair(self):
        report = check_lemma_bounds(SymMatrix.diag([1.0, 2.0]), SymMatrix.diag([3.0, 4.0]))
        assert report.product_eigenvalues == pytest.approx((3.0, 8.0))
        assert (report.product_lower, report.product_upper) == (3.0, 8.0)
        assert report.holds

    def test_random_commuting_pairs(self, rng):
        for _ in range(1000):
            n = int(rng.integers(1, 6))
            base = random_symmetric(rng, n).entries
            c = rng.standard_normal(3)
            q = SymMatrix.symmetrized(c[0] * np.eye(n) + c[1] * base)
            d = SymMatrix.symmetrized(c[2] * base + base @ base)
            assert check_lemma_bounds(q, d).holds

    def test_non_commuting_rejected(self):
        q = SymMatrix.from_array([[0.0, 1.0], [1.0, 0.0]])
        d = SymMatrix.diag([1.0, -1.0])
        with pytest.raises(PreconditionError, match="do not commute"):
            check_lemma_bounds(q, d)
