"""lyapcert - command-line entry point"""

import logging
import os
from dataclasses import dataclass, field
from functools import lru_cache

import typer

from .commands import certify, check, example, orbits, simulate
from .commands.common import handle_exceptions
from .errors import InputError


def _env_int(name: str, value: int | str) -> int:
    match value:
        case int():
            return value
        case str() if value.strip().lstrip("+-").isdigit():
            return int(value)
        case _:
            raise InputError(f"{name} must be an integer, got {value!r}")


@dataclass(frozen=True)
class Settings:
    """Process settings with environment variable support and validation"""

    seed: int = field(default_factory=lambda: os.getenv("LYAPCERT_SEED", "0"))
    log_level: str = field(default_factory=lambda: os.getenv("LYAPCERT_LOG_LEVEL", "WARNING"))
    workers: int = field(default_factory=lambda: os.getenv("LYAPCERT_WORKERS", "4"))

    def __post_init__(self) -> None:
        """Parse and validate settings; bad values are input errors"""
        match self.log_level.upper():
            case "DEBUG" | "INFO" | "WARNING" | "ERROR" | "CRITICAL":
                object.__setattr__(self, "log_level", self.log_level.upper())
            case _:
                raise InputError(f"LYAPCERT_LOG_LEVEL is not a log level: {self.log_level!r}")

        object.__setattr__(self, "seed", _env_int("LYAPCERT_SEED", self.seed))
        object.__setattr__(self, "workers", _env_int("LYAPCERT_WORKERS", self.workers))
        if self.seed < 0:
            raise InputError(f"Seed must be non-negative, got {self.seed}")
        if not (1 <= self.workers <= 256):
            raise InputError(f"Workers must be between 1 and 256, got {self.workers}")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Settings read from the environment on first use"""
    return Settings()


def clear_settings_cache() -> None:
    get_settings.cache_clear()


logger = logging.getLogger(__name__)


# =============================================================================
# TYPER APPLICATION
# =============================================================================

app = typer.Typer(
    name="lyapcert",
    help="Check and certify boundedness and periodic solutions of forced third-order systems.",
    no_args_is_help=True,
    add_completion=False,
)


@app.callback()
@handle_exceptions("loading settings")
def configure(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at INFO level"),
) -> None:
    """Configure logging once per invocation; logs go to stderr."""
    settings = get_settings()
    level = logging.INFO if verbose and settings.log_level == "WARNING" else settings.log_level
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        force=True,
    )
    logger.debug(f"Seed fallback: {settings.seed}, workers: {settings.workers}")


app.command("check")(check.check)
app.command("simulate")(simulate.simulate)
app.command("find-orbit")(orbits.find_orbit)
app.command("uniqueness")(orbits.uniqueness)
app.command("certify")(certify.certify)
app.command("example4")(example.example4)


# =============================================================================
# APPLICATION STARTUP
# =============================================================================


def main() -> None:
    """Main entry point for the application"""
    app()


if __name__ == "__main__":
    main()
