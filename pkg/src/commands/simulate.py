"""``simulate``: integrate one trajectory and emit CSV"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Annotated, Optional

import typer

from ..core.integrate import IntegratorOptions, integrate, trajectory_to_csv
from ..core.system import State
from ..dependencies.system import get_system
from .check import ConfigOption, EpsOption, OmegaOption, OutOption
from .common import ExitCode, handle_exceptions, load_config, parse_vector, write_output

logger = logging.getLogger(__name__)


@handle_exceptions("simulating")
def simulate(
    config: ConfigOption,
    out: OutOption = None,
    x0: Annotated[Optional[str], typer.Option("--x0", help="Initial X, comma-separated")] = None,
    y0: Annotated[Optional[str], typer.Option("--y0", help="Initial Y, comma-separated")] = None,
    z0: Annotated[Optional[str], typer.Option("--z0", help="Initial Z, comma-separated")] = None,
    t1: Annotated[float, typer.Option("--t1", help="Final time")] = 10.0,
    dt: Annotated[Optional[float], typer.Option("--dt", help="Fixed RK4 step")] = None,
    rtol: Annotated[float, typer.Option("--rtol", help="RKF45 relative tolerance")] = 1e-8,
    atol: Annotated[float, typer.Option("--atol", help="RKF45 absolute tolerance")] = 1e-10,
    n_out: Annotated[int, typer.Option("--n-out", min=1, help="Output intervals")] = 1000,
    eps: EpsOption = None,
    omega: OmegaOption = None,
) -> None:
    """Integrate from (x0, y0, z0) to t1; the V column uses the config's A and B."""
    cfg = load_config(config)
    system = get_system(cfg, eps=eps, omega=omega)
    n = system.n
    start = State(parse_vector(x0, n, "x0"), parse_vector(y0, n, "y0"), parse_vector(z0, n, "z0"))
    opts = (
        IntegratorOptions(method="rk4", h=dt, n_out=n_out)
        if dt is not None
        else IntegratorOptions(method="rkf45", rtol=rtol, atol=atol, n_out=n_out)
    )

    trajectory = integrate(system, start, 0.0, t1, opts, raise_on_divergence=False)
    text = trajectory_to_csv(trajectory.with_v(system.A, system.B))
    if trajectory.diverged:
        text += f"# diverged at t={trajectory.diverged_at!r}\n"
    write_output(text, out)

    if trajectory.diverged:
        logger.warning(f"Trajectory diverged at t={trajectory.diverged_at}")
        raise typer.Exit(int(ExitCode.NUMERIC))
