"""``check``: sample the hypotheses over a box and report every verdict"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, Optional

import typer

from ..core.hypothesis import (
    ConditionReport,
    ForcingBound,
    SpectralBounds,
    check_theorem_conditions,
    forcing_bound_fit,
    spectral_bounds,
)
from ..core.lyapunov import DecayConstants, decay_constants
from ..core.system import SystemDef
from ..dependencies.system import build_box, get_system
from ..models.reports import (
    CheckReport,
    DecayConstantsModel,
    ForcingBoundModel,
    SpectralBoundsModel,
    SystemSummary,
    VerdictModel,
    render_json,
)
from .common import current_settings, finish, handle_exceptions, load_config, write_output

logger = logging.getLogger(__name__)

ConfigOption = Annotated[Path, typer.Option("--config", help="System config JSON ('-' for stdin)")]
OutOption = Annotated[Optional[Path], typer.Option("--out", help="Write output here instead of stdout")]
BoxOption = Annotated[Optional[float], typer.Option("--box", help="Symmetric box radius")]
GridOption = Annotated[Optional[int], typer.Option("--grid", min=2, help="Grid points per axis")]
RandomOption = Annotated[Optional[int], typer.Option("--random", min=0, help="Extra random samples")]
SeedOption = Annotated[Optional[int], typer.Option("--seed", min=0, help="Sampling seed")]
EpsOption = Annotated[Optional[float], typer.Option("--eps", help="Override eps")]
OmegaOption = Annotated[Optional[float], typer.Option("--omega", help="Override the period")]


@dataclass(frozen=True, slots=True)
class CheckOutcome:
    system: SystemDef
    bounds: SpectralBounds
    conditions: ConditionReport
    forcing: ForcingBound
    decay: DecayConstants


def run_check(
    config: Path,
    box: float | None,
    grid: int | None,
    random: int | None,
    seed: int | None,
    eps: float | None,
    omega: float | None,
    record_samples: bool = False,
) -> CheckOutcome:
    settings = current_settings()
    cfg = load_config(config)
    system = get_system(cfg, eps=eps, omega=omega)
    domain = build_box(cfg, box, grid, random, seed, fallback_seed=settings.seed)

    bounds = spectral_bounds(system, domain, record_samples, workers=settings.workers)
    conditions = check_theorem_conditions(bounds)
    forcing = forcing_bound_fit(system, domain)
    decay = decay_constants(bounds, forcing)
    if failed := conditions.failed:
        logger.info(f"Failed conditions for {system.name}: {', '.join(failed)}")
    return CheckOutcome(system, bounds, conditions, forcing, decay)


def report_fields(outcome: CheckOutcome) -> dict[str, object]:
    return {
        "system": SystemSummary.of(outcome.system),
        "bounds": SpectralBoundsModel.model_validate(outcome.bounds),
        "conditions": [VerdictModel.model_validate(v) for v in outcome.conditions.verdicts],
        "forcing": ForcingBoundModel.model_validate(outcome.forcing),
        "decay": DecayConstantsModel.model_validate(outcome.decay),
    }


@handle_exceptions("checking hypotheses")
def check(
    config: ConfigOption,
    out: OutOption = None,
    box: BoxOption = None,
    grid: GridOption = None,
    random: RandomOption = None,
    seed: SeedOption = None,
    eps: EpsOption = None,
    omega: OmegaOption = None,
    samples: Annotated[bool, typer.Option("--samples", help="Include the sample log")] = False,
) -> None:
    """Check every hypothesis of the theorem on a sampled domain box."""
    outcome = run_check(config, box, grid, random, seed, eps, omega, record_samples=samples)
    report = CheckReport(**report_fields(outcome))
    write_output(render_json(report), out)
    finish(report.verdict == "pass")
