"""Periodic orbits, difference decay fits and ultimate-bound estimates"""

import math
from dataclasses import replace

import numpy as np
import pytest

from src.core.orbits import (
    OrbitResult,
    find_periodic,
    multistart_periodic,
    random_ball_states,
    ultimate_bound,
    uniqueness_decay,
    verify_periodic,
)
from src.core.system import State
from src.errors import InputError, PreconditionError
from tests.conftest import ORACLE_ORBIT, linear_config, make_system

S1 = State.from_vector([1.0, 0.0, 0.0])
# (1, -1, 0) has no component along the fast real mode
S2 = State.from_vector([0.0, 1.0, 0.0])


class TestShooting:
    def test_equilibrium_needs_no_iterations(self, homogeneous_system):
        orbit = find_periodic(homogeneous_system, State.zeros(1))
        assert orbit.converged
        assert orbit.newton_iters == 0
        assert orbit.residual == 0.0

    def test_oracle_orbit(self, oracle_system):
        orbit = find_periodic(oracle_system, State.zeros(1))
        assert orbit.converged
        assert orbit.newton_iters <= 20
        assert orbit.s_star.as_vector() == pytest.approx(ORACLE_ORBIT, abs=1e-6)
        assert orbit.floquet_spectrum_radius is not None
        assert orbit.floquet_spectrum_radius < 1.0

    def test_example4_zero_orbit(self, example4_system):
        orbit = find_periodic(example4_system, State.zeros(2))
        assert orbit.converged
        assert np.all(orbit.s_star.as_vector() == 0.0)

    @pytest.mark.parametrize(
        "kwargs",
        [{"tol": 0.0}, {"guess": State.zeros(2)}],
        ids=["non_positive_tolerance", "dimension_mismatch"],
    )
    def test_invalid_requests(self, oracle_system, kwargs):
        args = {"guess": State.zeros(1), **kwargs}
        with pytest.raises(InputError):
            find_periodic(oracle_system, **args)


class TestVerification:
    def test_converged_orbit_repeats(self, oracle_system):
        orbit = find_periodic(oracle_system, State.zeros(1))
        check = verify_periodic(oracle_system, orbit)
        assert check.passes
        assert check.samples == 64
        assert check.tolerance == pytest.approx(1e-9)

    def test_perturbed_orbit_fails(self, oracle_system):
        orbit = find_periodic(oracle_system, State.zeros(1))
        nudged = replace(orbit, s_star=State.from_vector(orbit.s_star.as_vector() + 1e-3))
        assert not verify_periodic(oracle_system, nudged).passes

    def test_unconverged_orbit_rejected(self, oracle_system):
        orbit = OrbitResult(State.zeros(1), residual=1.0, newton_iters=50, converged=False, tolerance=1e-10)
        with pytest.raises(PreconditionError):
            verify_periodic(oracle_system, orbit)

    def test_sample_count_must_divide_steps(self, oracle_system):
        orbit = find_periodic(oracle_system, State.zeros(1))
        with pytest.raises(InputError):
            verify_periodic(oracle_system, orbit, samples=100)


class TestMultistart:
    def test_ball_states_are_seeded_and_inside(self):
        first = random_ball_states(2, 50, 3.0, seed=9)
        second = random_ball_states(2, 50, 3.0, seed=9)
        assert [s.as_vector().tolist() for s in first] == [s.as_vector().tolist() for s in second]
        assert all(s.norm_sq <= 9.0 for s in first)

    def test_linear_system_has_one_orbit(self, oracle_system):
        result = multistart_periodic(oracle_system, starts=4, radius=2.0, seed=1)
        assert result.attempts == 4
        assert result.failures == 0
        assert len(result.orbits) == 1
        assert result.orbits[0].s_star.as_vector() == pytest.approx(ORACLE_ORBIT, abs=1e-6)


class TestUniquenessDecay:
    def test_oracle_rate(self, oracle_system):
        fit = uniqueness_decay(oracle_system, S1, S2)
        assert fit.delta_fit == pytest.approx(0.5, abs=0.05)
        assert fit.r_squared >= 0.99
        assert not fit.non_contracting
        assert not fit.floor_reached
        first, second = fit.window_deltas
        assert first == pytest.approx(second, rel=0.1)
        assert fit.v_delta_fit == pytest.approx(0.5, abs=0.1)
        assert fit.fit_window[0] >= 15.0 - 1e-9

    def test_five_oracle_pairs_share_the_rate(self, oracle_system):
        starts = random_ball_states(1, 10, 2.0, seed=7)
        for s1, s2 in zip(starts[::2], starts[1::2], strict=True):
            fit = uniqueness_decay(oracle_system, s1, s2)
            assert fit.delta_fit == pytest.approx(0.5, abs=0.05)
            assert fit.r_squared >= 0.99
            assert not fit.non_contracting

    def test_strongly_damped_difference_hits_floor_early(self):
        # triple root at -10
        damped = make_system(linear_config([[30.0]], [[300.0]], [[1000.0]], [1.0]))
        fit = uniqueness_decay(damped, S1, S2, horizon=30.0, steps=100)
        assert fit.floor_reached
        assert not fit.non_contracting
        assert 8.0 < fit.delta_fit < 10.5
        assert fit.r_squared >= 0.99
        assert fit.fit_window[1] < 5.0

    def test_identical_starts_are_degenerate(self, oracle_system):
        fit = uniqueness_decay(oracle_system, S1, S1)
        assert fit.degenerate
        assert math.isnan(fit.delta_fit)

    def test_undamped_difference_does_not_contract(self, undamped_system):
        fit = uniqueness_decay(undamped_system, State.zeros(1), State.from_vector([0.0, 1.0, 0.0]))
        assert fit.non_contracting

    def test_state_dependent_forcing_rejected(self, example4_system):
        with pytest.raises(PreconditionError):
            uniqueness_decay(example4_system, State.zeros(2), State.from_vector([0.1] * 6))

    @pytest.mark.parametrize(
        "kwargs", [{"fit_window_fraction": 0.0}, {"horizon": -1.0}], ids=["window", "horizon"]
    )
    def test_invalid_arguments(self, oracle_system, kwargs):
        with pytest.raises(InputError):
            uniqueness_decay(oracle_system, S1, S2, **kwargs)


class TestUltimateBound:
    def test_equilibrium(self, homogeneous_system):
        estimate = ultimate_bound(homogeneous_system, [State.zeros(1)], horizon=10.0)
        assert estimate.Delta_1_est == 0.0
        assert estimate.diverged_count == 0

    def test_oracle_supremum(self, oracle_system):
        starts = random_ball_states(1, 100, 5.0, seed=0)
        estimate = ultimate_bound(oracle_system, starts, horizon=40.0, workers=4)
        assert estimate.start_count == 100
        assert estimate.diverged_count == 0
        assert estimate.Delta_1_est == pytest.approx(1.0, rel=0.1)

    def test_divergent_runs_are_counted(self, anti_damped_system):
        estimate = ultimate_bound(anti_damped_system, [State.from_vector([1.0, 0.0, 0.0])], horizon=60.0)
        assert estimate.diverged_count == 1
        assert math.isnan(estimate.Delta_1_est)
        assert 25.0 < estimate.diverged_at[0] < 50.0

    @pytest.mark.parametrize(
        "kwargs",
        [{"horizon": 0.0}, {"tail_fraction": 1.5}, {"starts": []}],
        ids=["horizon", "tail", "no_starts"],
    )
    def test_invalid_arguments(self, oracle_system, kwargs):
        args = {"starts": [State.zeros(1)], "horizon": 5.0, **kwargs}
        with pytest.raises(InputError):
            ultimate_bound(oracle_system, **args)

    @pytest.mark.slow
    def test_example4_runs_stay_finite(self, example4_system):
        # reduced run; see "example4 boundedness run" in DESIGN.md for the drift and stiffness
        starts = random_ball_states(2, 3, 0.5, seed=0)
        estimate = ultimate_bound(example4_system, starts, horizon=20.0)
        assert estimate.diverged_count == 0
        assert math.isfinite(estimate.Delta_1_est)
