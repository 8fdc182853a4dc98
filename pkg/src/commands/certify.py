"""``certify``: hypothesis check plus the Lyapunov decrease certificate"""

from __future__ import annotations

import logging
from typing import Annotated, Optional

import numpy as np
import typer

from ..core.lyapunov import decrease_spot_test, v_gram_bounds, vdot_decomposition
from ..core.system import State
from ..errors import NotPositiveDefiniteError, PreconditionError
from ..models.reports import (
    CertifyReport,
    DecreaseSpotModel,
    LyapunovModel,
    QuadraticBoundsModel,
    render_json,
)
from .check import (
    BoxOption,
    ConfigOption,
    EpsOption,
    GridOption,
    OmegaOption,
    OutOption,
    RandomOption,
    SeedOption,
    report_fields,
    run_check,
)
from .common import current_settings, finish, handle_exceptions, write_output

logger = logging.getLogger(__name__)


@handle_exceptions("certifying")
def certify(
    config: ConfigOption,
    out: OutOption = None,
    box: BoxOption = None,
    grid: GridOption = None,
    random: RandomOption = None,
    seed: SeedOption = None,
    eps: EpsOption = None,
    omega: OmegaOption = None,
    spot_samples: Annotated[
        int, typer.Option("--spot-samples", min=1, help="States for the decrease spot test")
    ] = 200,
) -> None:
    """Check the hypotheses, then test V̇ <= -delta_6·||s||² outside radius delta_8."""
    outcome = run_check(config, box, grid, random, seed, eps, omega)
    system = outcome.system
    seed = seed if seed is not None else current_settings().seed

    quadratic = quadratic_error = None
    try:
        quadratic = QuadraticBoundsModel.model_validate(v_gram_bounds(system.A, system.B))
    except NotPositiveDefiniteError as e:
        quadratic_error = str(e)

    decrease = decrease_error = None
    try:
        spot = decrease_spot_test(system, outcome.decay, samples=spot_samples, seed=seed)
        decrease = DecreaseSpotModel.model_validate(spot)
    except PreconditionError as e:
        decrease_error = str(e)
        logger.info(f"Decrease spot test skipped: {e}")

    unit = State.from_vector(np.ones(3 * system.n) / np.sqrt(3 * system.n))
    decomposition = vdot_decomposition(system, system.A, system.B, 0.0, unit)

    report = CertifyReport(
        **report_fields(outcome),
        quadratic_bounds=quadratic,
        quadratic_bounds_error=quadratic_error,
        decrease=decrease,
        decrease_error=decrease_error,
        decomposition_at_unit_state=LyapunovModel.model_validate(decomposition),
    )
    write_output(render_json(report), out)
    finish(report.certified)
