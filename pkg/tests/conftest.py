"""
Shared fixtures: system configs for the oracles and the worked example,
built systems, and a scenario table for the command-line tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from src.core.hypothesis import SpectralBounds
from src.core.linalg import SymMatrix
from src.core.system import SystemDef
from src.dependencies.system import build_system, clear_system_cache
from src.main import clear_settings_cache
from src.models.config import system_config_adapter


def linear_config(
    A0: list[list[float]],
    B0: list[list[float]],
    C0: list[list[float]],
    amplitude: list[float] | None = None,
    **extra: Any,
) -> dict[str, Any]:
    """Config dict for a linear-constant system"""
    return {
        "n": len(A0),
        "family": "linear-constant",
        "params": {"A0": A0, "B0": B0, "C0": C0, "forcing_amplitude": amplitude},
        **extra,
    }


# x''' + 2x'' + 2x' + x = cos t; periodic response (sin t - cos t)/2
ORACLE_CONFIG = linear_config([[2.0]], [[2.0]], [[1.0]], [1.0])
ORACLE_ORBIT = (-0.5, 0.5, 0.5)

# x''' - x'' + x' + x = 0 has a root with positive real part
ANTI_DAMPED_CONFIG = linear_config([[-1.0]], [[1.0]], [[1.0]])

# x''' + x' = 0 has roots 0, ±i
UNDAMPED_CONFIG = linear_config([[0.0]], [[1.0]], [[0.0]])

# Passes every hypothesis with room to spare
CERTIFIABLE_CONFIG = linear_config(
    [[2.0, 0.0], [0.0, 2.0]],
    [[2.0, 0.0], [0.0, 2.0]],
    [[0.05, 0.0], [0.0, 0.05]],
    [0.01, 0.0],
    eps=1e-5,
)

EXAMPLE4_CONFIG = {"n": 2, "family": "example4"}
EXAMPLE4_TIME_CONFIG = {"n": 2, "family": "example4", "params": {"forcing": "time"}}

DIAGONAL_CONFIG = {
    "n": 2,
    "family": "diagonal-polynomial",
    "params": {
        "c0": 2.0,
        "c1": 0.5,
        "g0": 1.5,
        "g1": 0.25,
        "a1": 1.0,
        "a3": 1.0,
        "forcing_amplitude": [1.0, 0.5],
    },
}


def make_system(raw: dict[str, Any]) -> SystemDef:
    return build_system(system_config_adapter.validate_python(raw))


@dataclass(frozen=True, slots=True)
class CliScenario:
    """Immutable command-line scenario for parametrized tests."""

    name: str
    command: str
    config: dict[str, Any]
    args: tuple[str, ...]
    expected_exit: int


CLI_SCENARIOS: list[CliScenario] = [
    CliScenario("check_certifiable", "check", CERTIFIABLE_CONFIG, ("--grid", "3"), 0),
    CliScenario("check_example4", "check", EXAMPLE4_CONFIG, ("--grid", "3"), 1),
    CliScenario(
        "check_dimension_mismatch",
        "check",
        {**EXAMPLE4_CONFIG, "A": [[1.0]]},
        (),
        3,
    ),
    CliScenario("find_orbit_oracle", "find-orbit", ORACLE_CONFIG, (), 0),
    CliScenario("find_orbit_example4", "find-orbit", EXAMPLE4_CONFIG, (), 0),
    CliScenario("uniqueness_state_forcing", "uniqueness", EXAMPLE4_CONFIG, ("--pairs", "1"), 3),
    CliScenario("certify_example4", "certify", EXAMPLE4_CONFIG, ("--grid", "3"), 1),
    CliScenario("simulate_anti_damped", "simulate", ANTI_DAMPED_CONFIG, ("--x0", "1", "--t1", "60"), 2),
]


@pytest.fixture(autouse=True)
def fresh_system_cache():
    """Isolate the cached system construction between tests."""
    clear_system_cache()
    yield
    clear_system_cache()


@pytest.fixture(autouse=True)
def fresh_settings():
    """Settings are read from the environment on first use; reread them per test."""
    clear_settings_cache()
    yield
    clear_settings_cache()


@pytest.fixture
def oracle_system() -> SystemDef:
    return make_system(ORACLE_CONFIG)


@pytest.fixture
def example4_system() -> SystemDef:
    return make_system(EXAMPLE4_CONFIG)


@pytest.fixture
def example4_time_system() -> SystemDef:
    return make_system(EXAMPLE4_TIME_CONFIG)


@pytest.fixture
def diagonal_system() -> SystemDef:
    return make_system(DIAGONAL_CONFIG)


@pytest.fixture
def certifiable_system() -> SystemDef:
    return make_system(CERTIFIABLE_CONFIG)


@pytest.fixture
def anti_damped_system() -> SystemDef:
    return make_system(ANTI_DAMPED_CONFIG)


@pytest.fixture
def undamped_system() -> SystemDef:
    return make_system(UNDAMPED_CONFIG)


@pytest.fixture
def homogeneous_system() -> SystemDef:
    """x''' + 2x'' + 2x' + x = 0"""
    return make_system(linear_config([[2.0]], [[2.0]], [[1.0]]))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def write_config(tmp_path: Path):
    """Write a config dict to a temporary JSON file and return its path."""

    def _write(raw: dict[str, Any], name: str = "system.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(raw, indent=2), encoding="utf-8")
        return path

    return _write


@pytest.fixture(params=CLI_SCENARIOS, ids=lambda scenario: scenario.name)
def cli_scenario(request) -> CliScenario:
    return request.param


def random_symmetric(rng: np.random.Generator, n: int) -> SymMatrix:
    m = rng.standard_normal((n, n))
    return SymMatrix.symmetrized(m + m.T)


BASE_BOUNDS = SpectralBounds(
    delta_a=2.0,
    Delta_a=2.0,
    delta_b=2.0,
    Delta_b=2.0,
    delta_h=0.05,
    Delta_h=0.05,
    k_printed=0.5,
    k_proof=1 / 16,
    sqrt_eps_budget=2.0 * 0.05 / 12.0,
    eps=1e-5,
    f_min=2.0,
    f_max=2.0,
    g_min=2.0,
    g_max=2.0,
    f_minus_a_min=0.001,
    f_minus_a_max=0.001,
    g_minus_b_min=0.001,
    g_minus_b_max=0.001,
    h_zero_norm=0.0,
    commutator_f_g=0.0,
    commutator_f_secant=0.0,
    commutator_g_secant=0.0,
    forcing_period_error=0.0,
    secant_cap_first=0.25,
    secant_cap_second=0.25,
    sample_count=1,
    grid_points_per_axis=2,
    box_lower=(-1.0,) * 6,
    box_upper=(1.0,) * 6,
    box_random=0,
    seed=0,
)


def bounds_with(**changes: float) -> SpectralBounds:
    """Hand-made spectral bounds for constant-level tests."""
    return replace(BASE_BOUNDS, **changes)


SQRT3 = math.sqrt(3.0)
