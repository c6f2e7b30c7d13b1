"""Approximation of a delay signal by an LI_tau delay.

The anchors are n_{i,k} = floor(h_i(k tau+) / tau); between lattice points the
approximant grows with unit slope, so h_hat(t) = n_{i,k} tau + (t - k tau).
"""
from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from delaygauge.core.config import get_settings
from delaygauge.core.errors import ConfigurationError
from delaygauge.model.delays import DelayBundle, LiTauDelay, as_bundle

LOGGER = logging.getLogger(__name__)

_FLOOR_SLACK = 1e-9


class DelayApproximation(BaseModel):
    """An LI_tau approximant with its sampled error against the source signal."""

    model_config = ConfigDict(frozen=True)

    delay: LiTauDelay
    sup_error: float
    modulus: float
    bound: float
    within_bound: bool


def _is_multiple(value: float, tau: float, atol: float) -> bool:
    ratio = value / tau
    return abs(ratio - round(ratio)) <= atol / tau + _FLOOR_SLACK * max(1.0, abs(ratio))


def check_alignment(bundle: DelayBundle, tau: float) -> None:
    """tau must divide every declared lattice spacing and offset."""

    atol = get_settings().discretizer.alignment_atol
    for lattice in bundle.lattices():
        if not _is_multiple(lattice.spacing, tau, atol) or not _is_multiple(lattice.offset, tau, atol):
            raise ConfigurationError(
                f"tau = {tau:.12g} does not divide the discontinuity lattice "
                f"{lattice.offset:.12g} + {lattice.spacing:.12g} n"
            )


def _delay_bound(bundle: DelayBundle, t_end: float) -> float:
    declared = bundle.upper_bound()
    if declared is not None:
        return declared
    times = bundle.sample_times(0.0, t_end, 1e-3 * max(1.0, t_end))
    return float(bundle.values(times).max())


def sampled_modulus(bundle: DelayBundle, times: np.ndarray, values: np.ndarray, tau: float) -> float:
    """max |h(t + s) - h(t)| over 0 < s <= tau with t and t + s in one continuity piece."""

    if times.size < 2:
        return 0.0
    spacing = float(times[1] - times[0])
    reach = max(1, int(round(tau / spacing)))
    marks = bundle.breakpoints(float(times[0]), float(times[-1]))
    piece = np.searchsorted(marks, times + 1e-12, side="right")
    omega = 0.0
    for m in range(1, min(reach, times.size - 1) + 1):
        same = piece[m:] == piece[:-m]
        if np.any(same):
            diff = np.abs(values[m:] - values[:-m]).max(axis=1)
            omega = max(omega, float(diff[same].max()))
    return omega


def approximate_delay(
    h,
    tau: float,
    t_end: float,
    T_prime: Optional[float] = None,
    delay_bound: Optional[float] = None,
) -> DelayApproximation:
    """Floor construction of an LI_tau delay covering [0, t_end].

    `delay_bound` defaults to the signal's own bound or its sampled maximum T.
    `T_prime` defaults to the smallest lattice multiple with T' - T >= tau,
    n_tau = ceil(T / tau) + 1, so T' = T + tau exactly when tau divides T.
    Anchors reach floor(T / tau) and the delay values climb to the next lattice point.
    """

    if tau <= 0:
        raise ConfigurationError(f"tau must be positive, got {tau}")
    settings = get_settings().discretizer
    bundle = as_bundle(h)
    if bundle.width == 0:
        raise ConfigurationError("approximate_delay needs at least one delay component")
    check_alignment(bundle, tau)
    T = delay_bound if delay_bound is not None else _delay_bound(bundle, t_end)
    source = bundle.signals[0] if len(bundle.signals) == 1 else None
    if T_prime is None and isinstance(source, LiTauDelay) and _is_multiple(source.tau, tau, settings.alignment_atol):
        # an LI_tau signal on a coarser or equal mesh keeps its own window
        n_tau = int(round(source.T_prime / tau))
    elif T_prime is None:
        n_tau = int(math.ceil(T / tau - _FLOOR_SLACK)) + 1
    else:
        n_tau = int(round(T_prime / tau))
        if abs(n_tau * tau - T_prime) > settings.alignment_atol + _FLOOR_SLACK * T_prime:
            raise ConfigurationError(f"T' = {T_prime:.12g} is not a multiple of tau = {tau:.12g}")
        if T_prime - T < tau - settings.alignment_atol:
            raise ConfigurationError(f"need tau <= T' - T, got tau = {tau:.6g}, T' - T = {T_prime - T:.6g}")
    intervals = max(1, int(math.ceil(t_end / tau - _FLOOR_SLACK)))
    anchors = np.arange(intervals) * tau + settings.right_limit_offset
    right_limits = bundle.values(anchors)
    table = np.floor(right_limits / tau + _FLOOR_SLACK).astype(int)
    table = np.clip(table, 0, n_tau)
    delay = LiTauDelay(tau=tau, n_tau=n_tau, table=table.T.tolist())

    fine = np.linspace(0.0, intervals * tau, intervals * settings.modulus_refinement + 1)[:-1]
    exact = bundle.values(fine)
    error = float(np.abs(delay.values(fine) - exact).max())
    omega = sampled_modulus(bundle, fine, exact, tau)
    bound = tau + omega
    LOGGER.info(
        "LI_tau approximation: tau=%.6g, n_tau=%d, %d intervals, sup error %.3e (bound %.3e)",
        tau,
        n_tau,
        intervals,
        error,
        bound,
    )
    return DelayApproximation(
        delay=delay,
        sup_error=error,
        modulus=omega,
        bound=bound,
        within_bound=error <= bound + get_settings().numerics.sup_atol,
    )


__all__ = ["DelayApproximation", "approximate_delay", "check_alignment", "sampled_modulus"]
