"""Family factory and system construction from validated configs"""

from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np

from ..core.hypothesis import DomainBox
from ..core.linalg import SymMatrix
from ..core.system import SystemDef
from ..families.base import SystemFamily
from ..families.builtin import DiagonalPolynomialFamily, Example4Family, LinearConstantFamily
from ..models.config import (
    DiagonalPolynomialConfig,
    Example4Config,
    LinearConstantConfig,
    SystemConfig,
    system_config_adapter,
)

logger = logging.getLogger(__name__)


class FamilyFactory:
    """Create family instances from their configs using pattern matching"""

    @staticmethod
    def create_family(config: SystemConfig) -> SystemFamily:
        match config:
            case LinearConstantConfig(n=n, params=params):
                return LinearConstantFamily(n, params)
            case Example4Config(n=n, params=params):
                return Example4Family(n, params)
            case DiagonalPolynomialConfig(n=n, params=params):
                return DiagonalPolynomialFamily(n, params)
            case unknown:
                supported = ["linear-constant", "example4", "diagonal-polynomial"]
                raise ValueError(
                    f"Unknown system family: {type(unknown).__name__}. "
                    f"Supported families: {supported}"
                )


def _matrix(values: list[list[float]] | None) -> SymMatrix | None:
    return None if values is None else SymMatrix.from_array(values)


def build_system(config: SystemConfig, eps: float | None = None, omega: float | None = None) -> SystemDef:
    """SystemDef from a config; ``eps`` and ``omega`` override the config values"""
    family = FamilyFactory.create_family(config)
    system = family.build(
        eps=eps if eps is not None else config.eps,
        omega=omega if omega is not None else config.omega,
        A=_matrix(config.A),
        B=_matrix(config.B),
        params=config.params.model_dump(),
    )
    logger.info("Built %s system (n=%d, omega=%.6g)", system.name, system.n, system.omega)
    return system


@lru_cache(maxsize=8)
def _cached_system(payload: str, eps: float | None, omega: float | None) -> SystemDef:
    return build_system(system_config_adapter.validate_json(payload), eps=eps, omega=omega)


def get_system(
    config: SystemConfig, eps: float | None = None, omega: float | None = None
) -> SystemDef:
    """Cached construction keyed by the config's canonical JSON and the overrides"""
    return _cached_system(config.model_dump_json(), eps, omega)


def clear_system_cache() -> None:
    _cached_system.cache_clear()


def build_box(
    config: SystemConfig,
    radius: float | None = None,
    grid: int | None = None,
    random: int | None = None,
    seed: int | None = None,
    fallback_seed: int = 0,
) -> DomainBox:
    """Domain box from the config's ``box`` block with command-line overrides.

    Seed precedence: explicit ``seed``, then the config, then ``fallback_seed``.
    """
    box = config.box
    m = grid if grid is not None else box.grid
    r = random if random is not None else box.random
    if seed is None:
        seed = box.seed if box.seed is not None else fallback_seed
    if radius is None and box.lower is not None and box.upper is not None:
        return DomainBox(np.asarray(box.lower), np.asarray(box.upper), m, r, seed)
    return DomainBox.symmetric(config.n, radius if radius is not None else box.radius, m, r, seed)
