"""Consistency correlation of driven responses and parameter sweeps."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict
from scipy.integrate import trapezoid

from delaygauge.core.config import get_settings
from delaygauge.core.errors import ConfigurationError, DegenerateSignalError
from delaygauge.core.logging import timed
from delaygauge.integrate.trajectory import Trajectory
from delaygauge.reservoir.inputs import InputSignal, lorenz_input
from delaygauge.reservoir.simulate import Reservoir2Config, random_history_pair, simulate_reservoir2
from delaygauge.stability.reservoirs import reservoir2_analysis, reservoir2_region

LOGGER = logging.getLogger(__name__)


def _window(x: Trajectory, y: Trajectory, T: float, t_skip: float, refine: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    t_stop = t_skip + T
    for traj in (x, y):
        if traj.t0 > t_skip + 1e-12 or traj.t1 < t_stop - 1e-9 * max(1.0, t_stop):
            raise ConfigurationError(
                f"trajectory covers [{traj.t0:.6g}, {traj.t1:.6g}], correlation window is [{t_skip:.6g}, {t_stop:.6g}]"
            )
    times = np.union1d(x.dense_times(refine, t_skip, t_stop), y.dense_times(refine, t_skip, t_stop))
    times = np.unique(np.concatenate([[t_skip], times, [min(t_stop, x.t1, y.t1)]]))
    return times, np.real(x.evaluate(times)), np.real(y.evaluate(times))


def _moments(times: np.ndarray, values: np.ndarray, span: float):
    mean = trapezoid(values, times, axis=0) / span
    centred = values - mean
    std = np.sqrt(trapezoid(centred**2, times, axis=0) / span)
    return centred, std


def consistency_correlation(
    x: Trajectory,
    y: Trajectory,
    T: float,
    t_skip: Optional[float] = None,
    refine: int = 1,
) -> float:
    """gamma^2 = 1/(n T) sum_i int (x_i - mean)(y_i - mean) / (sd_x sd_y) dt over [t_skip, t_skip + T]."""

    t_skip = get_settings().reservoir.t_skip if t_skip is None else t_skip
    if T <= 0:
        raise ConfigurationError(f"correlation window T must be positive, got {T}")
    times, xs, ys = _window(x, y, T, t_skip, refine)
    span = float(times[-1] - times[0])
    cx, sx = _moments(times, xs, span)
    cy, sy = _moments(times, ys, span)
    floor = get_settings().reservoir.min_deviation
    flat = np.nonzero((sx <= floor) | (sy <= floor))[0]
    if flat.size:
        raise DegenerateSignalError(f"component {int(flat[0]) + 1} is constant on the window (deviation <= {floor:.0e})")
    integrand = (cx * cy) / (sx * sy)
    return float(trapezoid(integrand, times, axis=0).sum() / (xs.shape[1] * span))


class StationarityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    stationary: bool
    drift: float


def stationarity_drift(x: Trajectory, T: float, t_skip: Optional[float] = None, refine: int = 1) -> StationarityReport:
    """Largest change of a component mean between the two halves of the window, in units of its deviation."""

    t_skip = get_settings().reservoir.t_skip if t_skip is None else t_skip
    times, xs, _ = _window(x, x, T, t_skip, refine)
    span = float(times[-1] - times[0])
    _, std = _moments(times, xs, span)
    half = times[0] + 0.5 * span
    first, second = times <= half, times >= half
    m1 = trapezoid(xs[first], times[first], axis=0) / (half - times[0])
    m2 = trapezoid(xs[second], times[second], axis=0) / (times[-1] - half)
    drift = float(np.max(np.abs(m2 - m1) / np.maximum(std, get_settings().reservoir.min_deviation)))
    return StationarityReport(stationary=drift < get_settings().reservoir.stationarity_drift, drift=drift)


class SweepRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta: float
    delta: float
    abscissa: float
    region_ok: bool
    gamma_sq: float


def _sweep_point(
    beta: float,
    delta: float,
    J: InputSignal,
    base: Reservoir2Config,
    T: float,
    t_skip: float,
    step: Optional[float],
    seed: int,
) -> SweepRow:
    abscissa = reservoir2_analysis(beta, delta).abscissa if 0 < delta < 0.25 else math.nan
    cfg = base.model_copy(update={"beta": beta, "delta": delta})
    rng = np.random.default_rng(seed)
    phi1, phi2 = random_history_pair(rng, 2)
    x = simulate_reservoir2(cfg, J, phi1, t_skip + T, step=step)
    y = simulate_reservoir2(cfg, J, phi2, t_skip + T, step=step)
    try:
        gamma = consistency_correlation(x, y, T, t_skip)
    except DegenerateSignalError:
        gamma = math.nan
    return SweepRow(beta=beta, delta=delta, abscissa=abscissa, region_ok=reservoir2_region(beta, delta), gamma_sq=gamma)


def consistency_sweep(
    betas: Sequence[float],
    deltas: Sequence[float],
    T: float = 30.0,
    t_skip: Optional[float] = None,
    step: Optional[float] = None,
    J: Optional[InputSignal] = None,
    base: Optional[Reservoir2Config] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> List[SweepRow]:
    """gamma^2 for every (beta, delta); observed values only, no pass/fail outside the stable region."""

    settings = get_settings()
    t_skip = settings.reservoir.t_skip if t_skip is None else t_skip
    J = J or lorenz_input(t_skip + T)
    base = base or Reservoir2Config()
    seed = settings.reservoir.seed if seed is None else seed
    grid = [(float(b), float(d)) for b in betas for d in deltas]
    threads = threads or settings.runtime.threads
    LOGGER.info("Consistency sweep over %d parameter pairs", len(grid))

    def run(pair):
        return _sweep_point(pair[0], pair[1], J, base, T, t_skip, step, seed)

    with timed("Consistency sweep", LOGGER):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                return list(pool.map(run, grid))
        return [run(pair) for pair in grid]


def sweep_frame(rows: Sequence[SweepRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=["beta", "delta", "abscissa", "region_ok", "gamma_sq"])


def sweep_to_csv(rows: Sequence[SweepRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    sweep_frame(rows).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


__all__ = [
    "consistency_correlation",
    "StationarityReport",
    "stationarity_drift",
    "SweepRow",
    "consistency_sweep",
    "sweep_frame",
    "sweep_to_csv",
]
