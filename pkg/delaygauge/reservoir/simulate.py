"""Driven simulations of the two delayed reservoirs."""
from __future__ import annotations

import logging
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from delaygauge.core.config import get_settings
from delaygauge.core.errors import ConfigurationError
from delaygauge.integrate.solver import integrate
from delaygauge.integrate.trajectory import Trajectory
from delaygauge.model.catalog import RESERVOIR2_TAUS, reservoir1_entry, reservoir2_system
from delaygauge.model.delays import ConstantDelay, as_bundle
from delaygauge.model.history import AnyHistory, ConstantHistory, random_constant_history
from delaygauge.reservoir.inputs import InputSignal

LOGGER = logging.getLogger(__name__)


class Reservoir2Config(BaseModel):
    """Parameters of the sin^2 reservoir driven by J(t)."""

    model_config = ConfigDict(frozen=True)

    beta: float = Field(default=1.0 / 3.0, gt=0)
    delta: float = Field(default=0.125, gt=0)
    phase: float = 1.0
    gain: float = 7.0
    taus: List[float] = Field(default_factory=lambda: list(RESERVOIR2_TAUS), min_length=1)

    @field_validator("taus")
    @classmethod
    def nonnegative(cls, value: List[float]) -> List[float]:
        if min(value) < 0:
            raise ValueError("delays must be nonnegative")
        return value

    @property
    def count(self) -> int:
        return len(self.taus)

    @property
    def delay_bound(self) -> float:
        return max(max(self.taus), 1e-12)

    def delays(self) -> ConstantDelay:
        return ConstantDelay(values=self.taus)


def _check_cover(signal: Optional[InputSignal], t_end: float) -> None:
    if signal is not None and not signal.covers(0.0, t_end):
        raise ConfigurationError(f"input covers [{signal.times[0]:.6g}, {signal.t_end:.6g}], need [0, {t_end:.6g}]")


def simulate_reservoir2(
    cfg: Reservoir2Config,
    J: Optional[InputSignal],
    phi: Optional[AnyHistory],
    t_end: float,
    step: Optional[float] = None,
) -> Trajectory:
    """Integrate x1' = -x1 - delta x2 + beta/M sum sin^2(x1(t - tau_i) + phase + gain J(t)), x2' = x1."""

    _check_cover(J, t_end)
    system = reservoir2_system(
        beta=cfg.beta, delta=cfg.delta, phase=cfg.phase, gain=cfg.gain, taus=cfg.taus, J=J
    )
    phi = phi or ConstantHistory(values=[0.0, 0.0])
    return integrate(system, cfg.delays(), phi, t_end, step=step)


def simulate_reservoir1(
    g: float = 1.0,
    rho: float = 0.9,
    A=None,
    W=None,
    sigma_in: float = 1.0,
    h=None,
    u: Optional[InputSignal] = None,
    phi: Optional[AnyHistory] = None,
    t_end: float = 40.0,
    step: Optional[float] = None,
    T: Optional[float] = None,
) -> Trajectory:
    """Integrate x' = -g (x + tanh(rho A x(t - h) + sigma W u(t)))."""

    _check_cover(u, t_end)
    bundle = as_bundle(h if h is not None else ConstantDelay(values=[1.0]))
    if bundle.width != 1:
        raise ConfigurationError(f"reservoir1 reads one delay, the signal provides {bundle.width}")
    if T is None:
        declared = bundle.upper_bound()
        sampled = float(bundle.values(bundle.sample_times(0.0, t_end, 1e-3 * max(1.0, t_end))).max())
        T = max(declared or 0.0, sampled, 1e-3)
    entry = reservoir1_entry(g=g, rho=rho, A=A, W=W, sigma_in=sigma_in, u=u, T=T)
    phi = phi or ConstantHistory(values=[0.0] * entry.system.dim)
    return integrate(entry.system, bundle, phi, t_end, step=step)


def random_history_pair(rng: np.random.Generator, dim: int, amplitude: Optional[float] = None):
    """Two constant histories near rest, componentwise uniform on [-amplitude, amplitude].

    The default amplitude is `reservoir.history_amplitude`. Both responses then
    leave rest together and differ only by a slow-mode offset of that size.
    """

    a = get_settings().reservoir.history_amplitude if amplitude is None else float(amplitude)
    if a <= 0:
        raise ConfigurationError("history amplitude must be positive")
    low, high = -a, a
    return (
        random_constant_history(rng, dim, low, high),
        random_constant_history(rng, dim, low, high),
    )


def terminal_gap(x: Trajectory, y: Trajectory) -> float:
    return float(np.abs(x.final_state() - y.final_state()).sum())


__all__ = [
    "Reservoir2Config",
    "simulate_reservoir2",
    "simulate_reservoir1",
    "random_history_pair",
    "terminal_gap",
]
