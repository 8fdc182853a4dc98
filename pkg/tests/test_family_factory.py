"""Test config validation, the family factory and cached system construction"""

import math
from unittest.mock import patch

import numpy as np
import pytest
from pydantic import ValidationError

from src.dependencies.system import (
    FamilyFactory,
    build_box,
    build_system,
    clear_system_cache,
    get_system,
)
from src.families.builtin import DiagonalPolynomialFamily, Example4Family, LinearConstantFamily
from src.models.config import example4_config, system_config_adapter
from tests.conftest import CERTIFIABLE_CONFIG, EXAMPLE4_CONFIG, ORACLE_CONFIG, linear_config


def validate(raw):
    return system_config_adapter.validate_python(raw)


class TestConfigValidation:
    """Test the discriminated config models"""

    @pytest.mark.parametrize(
        "raw",
        [
            {**EXAMPLE4_CONFIG, "A": [[1.0]]},
            {**EXAMPLE4_CONFIG, "n": 3},
            {**EXAMPLE4_CONFIG, "A": [[1.0, 2.0], [0.0, 1.0]]},
            {**EXAMPLE4_CONFIG, "eps": 0.0},
            {**EXAMPLE4_CONFIG, "unknown": 1},
            {**EXAMPLE4_CONFIG, "family": "lorenz"},
            {**EXAMPLE4_CONFIG, "box": {"lower": [0.0] * 6}},
            {**EXAMPLE4_CONFIG, "box": {"lower": [1.0] * 6, "upper": [0.0] * 6}},
            {**EXAMPLE4_CONFIG, "box": {"lower": [0.0] * 3, "upper": [1.0] * 3}},
            linear_config([[1.0]], [[1.0]], [[1.0]], [1.0, 2.0]),
        ],
        ids=[
            "matrix_dimension",
            "example4_dimension",
            "asymmetric_comparison",
            "eps_zero",
            "extra_key",
            "unknown_family",
            "half_box",
            "inverted_box",
            "box_length",
            "forcing_length",
        ],
    )
    def test_rejected(self, raw):
        with pytest.raises(ValidationError):
            validate(raw)

    def test_restoring_matrix_may_be_asymmetric(self):
        config = validate(linear_config([[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]], [[1.0, 2.0], [0.0, 1.0]]))
        assert config.params.C0 == [[1.0, 2.0], [0.0, 1.0]]

    def test_defaults(self):
        config = validate(EXAMPLE4_CONFIG)
        assert config.eps == 1e-4
        assert config.box.grid == 5
        assert config.params.forcing == "state"

    def test_canonical_example(self):
        config = example4_config()
        assert config.n == 2
        assert config.omega == pytest.approx(2.0 * math.pi)


class TestFamilyFactory:
    """Test family dispatch with pattern matching"""

    @pytest.mark.parametrize(
        "raw,family",
        [
            (ORACLE_CONFIG, LinearConstantFamily),
            (EXAMPLE4_CONFIG, Example4Family),
            ({"n": 3, "family": "diagonal-polynomial"}, DiagonalPolynomialFamily),
        ],
        ids=["linear", "example4", "diagonal"],
    )
    def test_create_family(self, raw, family):
        assert isinstance(FamilyFactory.create_family(validate(raw)), family)

    def test_unknown_config_type(self):
        with pytest.raises(ValueError, match="Unknown system family"):
            FamilyFactory.create_family(object())

    def test_default_comparison_matrices(self):
        sys = build_system(validate(EXAMPLE4_CONFIG))
        shift = 0.25 * math.sqrt(1e-4)
        assert np.allclose(sys.A.entries, np.diag([2.0 - shift, 4.0 - shift]))
        assert np.allclose(sys.B.entries, np.diag([1.0 - shift, 2.0 - shift]))
        assert sys.forcing_depends_on_state

    def test_explicit_overrides(self):
        config = validate({**EXAMPLE4_CONFIG, "A": [[3.0, 0.0], [0.0, 3.0]], "params": {"forcing": "time"}})
        sys = build_system(config, eps=1e-6, omega=1.0)
        assert np.array_equal(sys.A.entries, 3.0 * np.eye(2))
        assert (sys.eps, sys.omega) == (1e-6, 1.0)
        assert not sys.forcing_depends_on_state

    def test_forcing_frequency_sets_period(self):
        raw = linear_config([[2.0]], [[2.0]], [[1.0]], [1.0])
        raw["params"]["forcing_frequency"] = 2.0
        assert build_system(validate(raw)).omega == pytest.approx(math.pi)

    def test_diagonal_polynomial_fields(self):
        raw = {"n": 2, "family": "diagonal-polynomial", "params": {"c1": 1.0, "a3": 2.0}}
        sys = build_system(validate(raw))
        X = np.array([1.0, -1.0])
        zero = np.zeros(2)
        assert np.array_equal(sys.f_matrix(X, zero, zero), np.diag([2.0, 2.0]))
        assert np.array_equal(sys.h_vector(X), np.array([3.0, -3.0]))
        # G follows the F coefficients when no g is given
        assert np.array_equal(sys.g_matrix(X, zero), np.diag([2.0, 2.0]))

    def test_diagonal_polynomial_independent_restoring_terms(self):
        raw = {
            "n": 2,
            "family": "diagonal-polynomial",
            "params": {"c0": 2.0, "c1": 1.0, "g0": 0.5, "g2": 3.0},
        }
        sys = build_system(validate(raw))
        X, Y = np.array([1.0, 2.0]), np.array([1.0, 0.0])
        zero = np.zeros(2)
        assert np.array_equal(sys.f_matrix(X, Y, zero), np.diag([3.0, 6.0]))
        # g1 falls back to c1
        assert np.array_equal(sys.g_matrix(X, Y), np.diag([0.5 + 1.0 + 3.0, 0.5 + 4.0]))

    def test_diagonal_polynomial_g0_must_be_positive(self):
        with pytest.raises(ValidationError):
            validate({"n": 1, "family": "diagonal-polynomial", "params": {"g0": 0.0}})


class TestSystemCache:
    """Test cached construction keyed by the canonical config"""

    def test_same_config_same_instance(self):
        config = validate(CERTIFIABLE_CONFIG)
        assert get_system(config) is get_system(validate(CERTIFIABLE_CONFIG))

    def test_clear_cache(self):
        config = validate(EXAMPLE4_CONFIG)
        first = get_system(config)
        clear_system_cache()
        assert get_system(config) is not first

    @patch("src.dependencies.system.build_system", wraps=build_system)
    def test_cache_avoids_rebuilds(self, mock_build):
        config = validate(ORACLE_CONFIG)
        get_system(config)
        get_system(config)
        assert mock_build.call_count == 1


class TestBuildBox:
    def test_config_box_used(self):
        config = validate({**EXAMPLE4_CONFIG, "box": {"radius": 2.0, "grid": 3, "seed": 4}})
        box = build_box(config)
        assert box.upper.tolist() == [2.0] * 6
        assert (box.m, box.seed) == (3, 4)

    def test_explicit_bounds(self):
        config = validate(
            {**EXAMPLE4_CONFIG, "box": {"lower": [-1.0] * 6, "upper": [0.5, 1.0, 1.0, 1.0, 1.0, 1.0]}}
        )
        assert build_box(config).upper[0] == 0.5

    def test_seed_precedence(self):
        with_seed = validate({**EXAMPLE4_CONFIG, "box": {"seed": 4}})
        without_seed = validate(EXAMPLE4_CONFIG)
        assert build_box(with_seed, seed=9, fallback_seed=1).seed == 9
        assert build_box(with_seed, fallback_seed=1).seed == 4
        assert build_box(without_seed, fallback_seed=1).seed == 1

    def test_overrides(self):
        box = build_box(validate(EXAMPLE4_CONFIG), radius=0.5, grid=2, random=7)
        assert box.lower.tolist() == [-0.5] * 6
        assert (box.m, box.r) == (2, 7)
