"""Sampled input signals J(t) / u(t) for the reservoirs."""
from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, PrivateAttr, field_serializer, field_validator
from scipy.interpolate import CubicSpline

from delaygauge.core.config import get_settings
from delaygauge.core.errors import ConfigurationError

LOGGER = logging.getLogger(__name__)


class InputSignal(BaseModel):
    """Cubic-spline interpolation of a sampled scalar or vector series."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    values: np.ndarray
    source: Literal["lorenz-x", "lorenz-y", "lorenz-z", "synthetic", "file"] = "synthetic"

    _spline: CubicSpline = PrivateAttr()

    @field_validator("times", "values", mode="before")
    @classmethod
    def as_array(cls, value):
        return np.asarray(value, dtype=float)

    @field_serializer("times", "values")
    def _dump(self, value: np.ndarray):
        return value.tolist()

    def model_post_init(self, __context) -> None:
        if self.times.ndim != 1 or self.times.size < 2:
            raise ConfigurationError("input signal needs at least two sample times")
        if self.values.shape[0] != self.times.size:
            raise ConfigurationError("input signal needs one value row per time")
        if np.any(np.diff(self.times) <= 0):
            raise ConfigurationError("input sample times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ConfigurationError("input signal values must be finite")
        self._spline = CubicSpline(self.times, self.values, axis=0)

    @property
    def width(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def covers(self, t_start: float, t_end: float) -> bool:
        return self.times[0] <= t_start + 1e-12 and t_end <= self.times[-1] + 1e-12

    def sample(self, ts) -> np.ndarray:
        return self._spline(np.asarray(ts, dtype=float))

    def __call__(self, t: float) -> Union[float, np.ndarray]:
        value = self._spline(float(t))
        return float(value) if self.values.ndim == 1 else np.asarray(value)


def _lorenz_field(state: np.ndarray, sigma: float, rho: float, beta: float) -> np.ndarray:
    x, y, z = state
    return np.array([sigma * (y - x), x * (rho - z) - y, x * y - beta * z])


def lorenz_input(
    t_end: float,
    dt: Optional[float] = None,
    sigma: float = 10.0,
    rho: float = 28.0,
    beta: float = 8.0 / 3.0,
    component: Literal["x", "y", "z"] = "x",
    seed_state: Tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> InputSignal:
    """One coordinate of a fixed-step RK4 Lorenz trajectory on [0, t_end]."""

    dt = dt if dt is not None else get_settings().reservoir.lorenz_dt
    if dt <= 0 or dt > 1e-2:
        raise ConfigurationError(f"Lorenz step must lie in (0, 1e-2], got {dt}")
    if t_end <= 0:
        raise ConfigurationError(f"t_end must be positive, got {t_end}")
    steps = int(math.ceil(t_end / dt - 1e-9))
    h = t_end / steps
    states = np.empty((steps + 1, 3))
    states[0] = seed_state
    for k in range(steps):
        s = states[k]
        k1 = _lorenz_field(s, sigma, rho, beta)
        k2 = _lorenz_field(s + 0.5 * h * k1, sigma, rho, beta)
        k3 = _lorenz_field(s + 0.5 * h * k2, sigma, rho, beta)
        k4 = _lorenz_field(s + h * k3, sigma, rho, beta)
        states[k + 1] = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    column = "xyz".index(component)
    LOGGER.debug("Lorenz input: %d RK4 steps of %.3g, component %s", steps, h, component)
    return InputSignal(times=np.linspace(0.0, t_end, steps + 1), values=states[:, column], source=f"lorenz-{component}")


def synthetic_input(
    t_end: float,
    frequencies: Sequence[float] = (1.0,),
    amplitudes: Sequence[float] = (1.0,),
    points: int = 2001,
) -> InputSignal:
    """sum_k a_k sin(w_k t) sampled on [0, t_end]."""

    times = np.linspace(0.0, t_end, points)
    values = sum(a * np.sin(w * times) for a, w in zip(amplitudes, frequencies))
    return InputSignal(times=times, values=np.asarray(values, dtype=float), source="synthetic")


def load_input(path: Union[str, Path]) -> InputSignal:
    """CSV with a `t` column followed by one or more value columns."""

    frame = pd.read_csv(path)
    if "t" not in frame.columns or frame.shape[1] < 2:
        raise ConfigurationError(f"{path}: input CSV needs a 't' column and at least one value column")
    values = frame.drop(columns="t").to_numpy(dtype=float)
    if values.shape[1] == 1:
        values = values[:, 0]
    return InputSignal(times=frame["t"].to_numpy(dtype=float), values=values, source="file")


__all__ = ["InputSignal", "lorenz_input", "synthetic_input", "load_input"]
