from __future__ import annotations

import os

from pydantic_settings import BaseSettings, SettingsConfigDict


def _default_workers() -> int:
    return max(1, os.cpu_count() or 1)


class Settings(BaseSettings):
    """
    Central configuration for the toolkit.

    Every numeric default is a desk-scale choice; the CLI echoes the resolved
    values into each output directory.
    """

    model_config = SettingsConfigDict(env_prefix="HSP_", env_file=".env", extra="ignore")

    # Output / runtime
    output_dir: str = "runs"
    log_level: str = "INFO"
    workers: int = _default_workers()
    spectrum_cache_dir: str = "cache/spectra"

    # Budgets
    max_geodesics: int = 2_000_000
    max_refinement_cells: int = 600_000

    # Geometry
    extended_precision_letters: int = 30

    # Dimension
    delta_bisection_tol: float = 1e-6
    refinement_depth: int = 12
    poincare_word_cutoff: int = 10

    # Zeta
    zeta_tolerance: float = 1e-6
    tail_inflation: float = 1.2

    # Continuation
    transfer_nodes: int = 24
    resolution_tol: float = 1e-6
    anchor_point: float = 3.0
    argument_max_depth: int = 24

    # Dynamics
    core_collar: float = 1.0


def get_settings() -> Settings:
    return Settings()
