"""Shared plumbing for commands: exit codes, error mapping, config input, output"""

from __future__ import annotations

import json
import logging
import os
import sys
import tempfile
from enum import IntEnum
from functools import wraps
from pathlib import Path
from typing import Any, Callable, NoReturn

import numpy as np
import typer
from pydantic import ValidationError

from ..errors import ConfigError, InputError, LyapcertError, NumericalError
from ..models.config import SystemConfig, system_config_adapter

logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    PASS = 0
    FAIL = 1
    NUMERIC = 2
    INPUT = 3


def fail(code: ExitCode, message: str) -> NoReturn:
    typer.echo(f"error: {message}", err=True)
    raise typer.Exit(int(code))


def handle_exceptions(operation_name: str):
    """Decorator mapping package exceptions onto the exit-code contract"""

    def decorator(func: Callable[..., Any]) -> Callable[..., Any]:
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except typer.Exit:
                raise
            except Exception as e:
                match e:
                    case InputError() | ValidationError() as ie:
                        logger.warning(f"Input error in {operation_name}: {ie}")
                        fail(ExitCode.INPUT, str(ie))
                    case NumericalError() as ne:
                        logger.warning(f"Numerical failure in {operation_name}: {ne}")
                        fail(ExitCode.NUMERIC, str(ne))
                    case OSError() as oe:
                        logger.warning(f"I/O error in {operation_name}: {oe}")
                        fail(ExitCode.INPUT, str(oe))
                    case LyapcertError() | ValueError() as other:
                        logger.warning(f"Rejected input in {operation_name}: {other}")
                        fail(ExitCode.INPUT, str(other))
                    case _:
                        logger.error(
                            f"Unexpected error in {operation_name}: {str(e)}",
                            exc_info=True,
                        )
                        fail(ExitCode.NUMERIC, f"internal error while {operation_name}")

        return wrapper

    return decorator


def _line_of(text: str, key: object) -> int | None:
    needle = f'"{key}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def _describe(error: ValidationError, text: str) -> str:
    lines = []
    for item in error.errors():
        loc = [part for part in item["loc"] if not str(part).startswith("function-")]
        field = ".".join(str(part) for part in loc) or "<root>"
        keys = [part for part in loc if isinstance(part, str)]
        where = _line_of(text, keys[-1]) if keys else None
        prefix = f"line {where}: " if where else ""
        lines.append(f"{prefix}{field}: {item['msg']}")
    return "; ".join(lines)


def parse_config(text: str) -> SystemConfig:
    """Validate a JSON config, reporting line numbers and field paths"""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return system_config_adapter.validate_python(raw)
    except ValidationError as e:
        raise ConfigError(_describe(e, text)) from e


def load_config(path: Path) -> SystemConfig:
    """Read a config from a file, or from stdin when the path is ``-``"""
    text = sys.stdin.read() if str(path) == "-" else path.read_text(encoding="utf-8")
    config = parse_config(text)
    logger.info(f"Loaded {config.family} config from {path}")
    return config


def parse_vector(text: str | None, length: int, name: str) -> np.ndarray:
    """Comma-separated floats; ``None`` gives zeros"""
    if text is None:
        return np.zeros(length)
    try:
        values = np.array([float(part) for part in text.split(",")], dtype=np.float64)
    except ValueError as e:
        raise InputError(f"{name} must be comma-separated numbers: {text!r}") from e
    if values.size != length:
        raise InputError(f"{name} needs {length} values, got {values.size}")
    return values


def write_output(text: str, out: Path | None) -> None:
    """Write to stdout, or atomically replace ``out`` via a temporary sibling"""
    if out is None:
        typer.echo(text, nl=False)
        return
    directory = out.resolve().parent
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{out.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, out)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    logger.info(f"Wrote {out}")


def finish(passed: bool) -> NoReturn:
    raise typer.Exit(int(ExitCode.PASS if passed else ExitCode.FAIL))


def current_settings():
    """Process settings, imported here to avoid a cycle with the entry point"""
    from ..main import get_settings

    return get_settings()
