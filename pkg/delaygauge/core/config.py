"""Tolerances and defaults for delaygauge, grouped by the subsystem that reads them.

A verdict is only as meaningful as its thresholds, so every constant a pass or
fail decision depends on is a field here. `get_settings()` builds the tree once
and folds in the `DELAYGAUGE_*` environment overrides.
"""
from __future__ import annotations

import os
from functools import lru_cache

from pydantic import BaseModel, Field


class NumericsSettings(BaseModel):
    """Tolerances for the dense matrix kernels."""

    sup_atol: float = Field(default=1e-12, description="Absolute tolerance for sup-type comparisons.")
    singular_pivot_rtol: float = Field(
        default=1e-13, description="LU pivots below this multiple of the matrix norm are singular."
    )
    solve_residual_rtol: float = 1e-10


class IntegratorSettings(BaseModel):
    """Method-of-steps integrator resolution."""

    history_grid: int = Field(default=2049, description="Points per [-T, 0] window.")
    default_step_factor: float = Field(default=1e-3, description="Default step is factor * min(T, 1).")
    positivity_floor: float = -1e-9
    interpolation_tol: float = 1e-9
    zero_delay_atol: float = Field(
        default=1e-14, description="Delays at or below this value read the current stage state."
    )


class SamplingSettings(BaseModel):
    """Finite-difference sampling of derivative suprema."""

    fd_relative_step: float = 1e-6
    grid_density: int = 9
    t_grid_points: int = 1024
    t_grid_horizon: float = Field(default=10.0, description="t-grid spans [0, horizon * T].")
    batch_size: int = 65536
    fixed_point_atol: float = 1e-8


class DiscretizerSettings(BaseModel):
    """LI_tau construction knobs."""

    right_limit_offset: float = Field(default=1e-12, description="h(k tau+) is read at k tau + offset.")
    alignment_atol: float = 1e-12
    modulus_refinement: int = Field(default=10, description="Oversampling factor for the modulus of continuity.")


class ReductionSettings(BaseModel):
    """Isoradial reduction and RIC enumeration."""

    bisection_tol: float = 1e-12
    ric_cap: int = Field(default=1_000_000, description="Full enumeration limit before random sampling.")
    identity_rtol: float = 1e-8
    seed: int = 20240101


class ReservoirSettings(BaseModel):
    """Reservoir consistency experiments."""

    t_skip: float = Field(default=5.0, description="Transient discarded before correlating responses.")
    seed: int = 7
    min_deviation: float = 1e-10
    stationarity_drift: float = 0.01
    lorenz_dt: float = 1e-2
    history_amplitude: float = Field(
        default=0.02, description="Random constant histories are drawn from [-a, a] around rest."
    )
    consistency_threshold: float = Field(default=0.99, description="gamma^2 a consistent reservoir must reach.")


class RuntimeSettings(BaseModel):
    """Process level toggles read from the environment."""

    threads: int = Field(default=1, description="Worker cap for sweeps (DELAYGAUGE_THREADS).")
    log_level: str = "INFO"


class Settings(BaseModel):
    """Root settings object shared by every module."""

    numerics: NumericsSettings = NumericsSettings()
    integrator: IntegratorSettings = IntegratorSettings()
    sampling: SamplingSettings = SamplingSettings()
    discretizer: DiscretizerSettings = DiscretizerSettings()
    reduction: ReductionSettings = ReductionSettings()
    reservoir: ReservoirSettings = ReservoirSettings()
    runtime: RuntimeSettings = RuntimeSettings()


def _runtime_from_env() -> RuntimeSettings:
    threads = int(os.getenv("DELAYGAUGE_THREADS", "1") or 1)
    return RuntimeSettings(
        threads=max(1, threads),
        log_level=os.getenv("DELAYGAUGE_LOG_LEVEL", "INFO"),
    )


@lru_cache
def get_settings() -> Settings:
    """Return cached settings instance."""

    return Settings(runtime=_runtime_from_env())


__all__ = ["Settings", "get_settings"]
