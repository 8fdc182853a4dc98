"""``find-orbit`` and ``uniqueness``: the existence and uniqueness conclusions"""

from __future__ import annotations

import logging
from typing import Annotated, Optional

import typer

from ..core.hypothesis import require_state_independent_forcing
from ..core.orbits import (
    find_periodic,
    multistart_periodic,
    random_ball_states,
    ultimate_bound,
    uniqueness_decay,
    verify_periodic,
)
from ..core.system import State
from ..dependencies.system import get_system
from ..models.reports import (
    BoundModel,
    DecayFitModel,
    OrbitModel,
    OrbitReport,
    PeriodicityModel,
    SystemSummary,
    UniquenessReport,
    render_json,
)
from .check import BoxOption, ConfigOption, EpsOption, OmegaOption, OutOption, SeedOption
from .common import current_settings, finish, handle_exceptions, load_config, parse_vector, write_output

logger = logging.getLogger(__name__)


@handle_exceptions("finding a periodic orbit")
def find_orbit(
    config: ConfigOption,
    out: OutOption = None,
    guess: Annotated[
        Optional[str], typer.Option("--guess", help="Initial state v1,...,v3n")
    ] = None,
    tol: Annotated[float, typer.Option("--tol", help="Shooting tolerance")] = 1e-10,
    max_iters: Annotated[int, typer.Option("--max-iters", min=1)] = 50,
    starts: Annotated[int, typer.Option("--starts", min=0, help="Random multistart guesses")] = 0,
    box: BoxOption = None,
    seed: SeedOption = None,
    eps: EpsOption = None,
    omega: OmegaOption = None,
) -> None:
    """Newton shooting on the period map, then a two-period verification."""
    settings = current_settings()
    cfg = load_config(config)
    system = get_system(cfg, eps=eps, omega=omega)
    start = State.from_vector(parse_vector(guess, 3 * system.n, "guess"))

    orbit = find_periodic(system, start, tol=tol, max_iters=max_iters)
    periodicity = verify_periodic(system, orbit) if orbit.converged else None

    extra = None
    if starts:
        extra = multistart_periodic(
            system,
            starts=starts,
            radius=box if box is not None else cfg.box.radius,
            seed=seed if seed is not None else settings.seed,
            tol=tol,
            max_iters=max_iters,
            workers=settings.workers,
        )
        logger.info(f"Multistart found {len(extra.orbits)} distinct orbits")

    report = OrbitReport(
        system=SystemSummary.of(system),
        orbit=OrbitModel.model_validate(orbit),
        periodicity=PeriodicityModel.model_validate(periodicity) if periodicity else None,
        multistart=[OrbitModel.model_validate(o) for o in extra.orbits] if extra else [],
        multistart_attempts=extra.attempts if extra else 0,
        multistart_failures=extra.failures if extra else 0,
    )
    write_output(render_json(report), out)
    finish(orbit.converged and periodicity is not None and periodicity.passes)


@handle_exceptions("measuring difference decay")
def uniqueness(
    config: ConfigOption,
    out: OutOption = None,
    pairs: Annotated[int, typer.Option("--pairs", min=1, help="Random start pairs")] = 5,
    horizon: Annotated[float, typer.Option("--t1", help="Integration horizon")] = 30.0,
    window: Annotated[
        float, typer.Option("--window", help="Trailing fraction of the horizon to fit")
    ] = 0.5,
    bound_starts: Annotated[
        int, typer.Option("--starts", min=0, help="Starts for the ultimate-bound estimate")
    ] = 0,
    box: BoxOption = None,
    seed: SeedOption = None,
    eps: EpsOption = None,
    omega: OmegaOption = None,
) -> None:
    """Fit the exponential decay of differences between paired solutions."""
    settings = current_settings()
    cfg = load_config(config)
    system = get_system(cfg, eps=eps, omega=omega)
    require_state_independent_forcing(system)

    radius = box if box is not None else cfg.box.radius
    seed = seed if seed is not None else settings.seed
    starts = random_ball_states(system.n, 2 * pairs, radius, seed)
    fits = [
        uniqueness_decay(system, s1, s2, horizon, window)
        for s1, s2 in zip(starts[::2], starts[1::2])
    ]

    bound = None
    if bound_starts:
        bound = ultimate_bound(
            system,
            random_ball_states(system.n, bound_starts, radius, seed + 1),
            horizon,
            workers=settings.workers,
        )

    report = UniquenessReport(
        system=SystemSummary.of(system),
        pairs=[DecayFitModel.model_validate(f) for f in fits],
        bound=BoundModel.model_validate(bound) if bound else None,
    )
    write_output(render_json(report), out)
    finish(report.contracting)
