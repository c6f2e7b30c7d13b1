"""Fixed-step RK4 method of steps with Hermite dense output.

Delayed arguments t - h_i(t) are read from the history before t0 and from
completed Hermite pieces afterwards. The step grid is split at the
breakpoints: t0, every declared delay-discontinuity lattice point and one
generation of their images under t -> t - h_i(t). Components whose delayed
argument freezes between lattice points (t mod P, LI_tau) read a fixed node
for the whole step.
"""
from __future__ import annotations

import logging
import math
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from delaygauge.core.config import get_settings
from delaygauge.core.errors import ConfigurationError, DivergenceError, HistoryUnderrunError
from delaygauge.integrate.trajectory import Trajectory
from delaygauge.model.bounds import BoundMatrices
from delaygauge.model.delays import DelayBundle, as_bundle, check_delay_range
from delaygauge.model.history import AnyHistory, SampledHistory
from delaygauge.model.system import SystemSpec, linear_system

LOGGER = logging.getLogger(__name__)


class PositivityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool
    minimum: float
    arg_t: float
    arg_component: int


class DecayFit(BaseModel):
    """log ||x(t)|| ~ log C - rate * t."""

    model_config = ConfigDict(frozen=True)

    rate: float
    prefactor: float
    residual: float
    samples: int


def default_step(delay_bound: float) -> float:
    return get_settings().integrator.default_step_factor * min(delay_bound, 1.0)


def _merge_close(points: np.ndarray, scale: float) -> np.ndarray:
    points = np.unique(points)
    if points.size < 2:
        return points
    keep = np.concatenate([[True], np.diff(points) > 1e-10 * max(1.0, scale)])
    return points[keep]


def image_breakpoints(bundle: DelayBundle, seeds: np.ndarray, t0: float, t_end: float, resolution: float) -> np.ndarray:
    """Times t in (t0, t_end) with t - h_i(t) equal to a seed, for components that do not freeze."""

    live = ~bundle.frozen_components()
    if not np.any(live) or seeds.size == 0:
        return np.empty(0)
    count = max(2, int(math.ceil((t_end - t0) / resolution)) + 1)
    grid = np.linspace(t0, t_end, count)
    lagged = grid[:, None] - bundle.values(grid)[:, live]
    found: List[np.ndarray] = []
    for seed in seeds:
        diff = lagged - seed
        for col in range(diff.shape[1]):
            g = diff[:, col]
            idx = np.nonzero((g[:-1] < 0) != (g[1:] < 0))[0]
            if idx.size:
                frac = -g[idx] / (g[idx + 1] - g[idx])
                found.append(grid[idx] + frac * (grid[idx + 1] - grid[idx]))
    if not found:
        return np.empty(0)
    pts = np.concatenate(found)
    return pts[(pts > t0) & (pts < t_end)]


def build_grid(t0: float, t_end: float, step: float, breakpoints: np.ndarray) -> np.ndarray:
    """Uniform steps of at most `step` on each interval between consecutive breakpoints."""

    marks = _merge_close(np.concatenate([[t0, t_end], breakpoints[(breakpoints > t0) & (breakpoints < t_end)]]), t_end)
    pieces = [np.array([t0])]
    for a, b in zip(marks[:-1], marks[1:]):
        n = max(1, int(math.ceil((b - a) / step - 1e-9)))
        pieces.append(np.linspace(a, b, n + 1)[1:])
    return np.concatenate(pieces)


class _MethodOfSteps:
    """Single-use RK4 driver over a precomputed step grid."""

    def __init__(self, system: SystemSpec, bundle: DelayBundle, history: AnyHistory, span: float, nodes: np.ndarray):
        self.system = system
        self.history = history
        self.span = span
        self.nodes = nodes
        self.t0 = float(nodes[0])
        settings = get_settings().integrator
        d, n = system.dim, nodes.size - 1
        dtype = complex if system.complex_valued else float
        self.X = np.empty((n + 1, d), dtype=dtype)
        self.FL = np.empty((n, d), dtype=dtype)
        self.FR = np.empty((n, d), dtype=dtype)
        starts, ends = nodes[:-1], nodes[1:]
        frozen = bundle.frozen_components()
        self.r = bundle.width
        H_start = bundle.values(starts)
        H_mid = bundle.values(starts + 0.5 * (ends - starts))
        H_end = bundle.values(ends)
        H_mid[:, frozen] = H_start[:, frozen] + 0.5 * (ends - starts)[:, None]
        H_end[:, frozen] = H_start[:, frozen] + (ends - starts)[:, None]
        self.S_start = starts[:, None] - H_start
        self.S_mid = (starts + 0.5 * (ends - starts))[:, None] - H_mid
        self.S_end = ends[:, None] - H_end
        atol = settings.zero_delay_atol
        self.Z_start = H_start <= atol
        self.Z_mid = H_mid <= atol
        self.Z_end = H_end <= atol
        self._check_underrun(starts, ends)

    def _check_underrun(self, starts: np.ndarray, ends: np.ndarray) -> None:
        floor = self.t0 - self.span - 1e-9 * max(1.0, self.span)
        for S, times in ((self.S_start, starts), (self.S_mid, 0.5 * (starts + ends)), (self.S_end, ends)):
            bad = np.argwhere(S < floor)
            if bad.size:
                row, comp = bad[0]
                raise HistoryUnderrunError(
                    f"delayed argument of component {comp} at t = {times[row]:.6g} reaches "
                    f"{S[row, comp]:.6g} < t0 - T = {self.t0 - self.span:.6g}",
                    component=int(comp),
                    time=float(times[row]),
                )

    def _hermite(self, j: int, s: float) -> np.ndarray:
        a, b = self.nodes[j], self.nodes[j + 1]
        h = b - a
        u = (s - a) / h
        u2, u3 = u * u, u * u * u
        return (
            (2 * u3 - 3 * u2 + 1) * self.X[j]
            + (u3 - 2 * u2 + u) * h * self.FL[j]
            + (-2 * u3 + 3 * u2) * self.X[j + 1]
            + (u3 - u2) * h * self.FR[j]
        )

    def _read(self, s: float, done: int, last_node: int) -> np.ndarray:
        """x(s) using pieces [0, done) and nodes [0, last_node]."""

        if s <= self.t0:
            return self.history(min(s - self.t0, 0.0))
        j = int(np.searchsorted(self.nodes, s, side="right")) - 1
        if j <= last_node and self.nodes[j] == s:
            return self.X[j]
        if j < done:
            return self._hermite(j, s)
        if done == 0:
            return self.X[0] + (s - self.t0) * self.FL[0]
        return self._hermite(done - 1, s)

    def _delayed(self, S_row: np.ndarray, Z_row: np.ndarray, state: np.ndarray, done: int, last_node: int) -> np.ndarray:
        ys = np.empty((self.r, self.system.dim), dtype=self.X.dtype)
        for i in range(self.r):
            ys[i] = state if Z_row[i] else self._read(float(S_row[i]), done, last_node)
        return ys

    def _field(self, t: float, state: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return np.asarray(self.system.evaluate(t, state, ys), dtype=self.X.dtype)

    def run(self, breakpoints: np.ndarray) -> Trajectory:
        nodes = self.nodes
        bp_set = set(np.round(breakpoints, 12).tolist())
        self.X[0] = self.history(0.0)
        self.FL[0] = self._field(self.t0, self.X[0], self._delayed(self.S_start[0], self.Z_start[0], self.X[0], 0, 0))
        n = nodes.size - 1
        for k in range(n):
            t, h = float(nodes[k]), float(nodes[k + 1] - nodes[k])
            x = self.X[k]
            k1 = self.FL[k]
            x2 = x + 0.5 * h * k1
            k2 = self._field(t + 0.5 * h, x2, self._delayed(self.S_mid[k], self.Z_mid[k], x2, k, k))
            x3 = x + 0.5 * h * k2
            k3 = self._field(t + 0.5 * h, x3, self._delayed(self.S_mid[k], self.Z_mid[k], x3, k, k))
            x4 = x + h * k3
            k4 = self._field(t + h, x4, self._delayed(self.S_end[k], self.Z_end[k], x4, k, k))
            x_next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x_next)):
                raise DivergenceError(f"state stopped being finite at t = {t + h:.6g}", time=t + h)
            self.X[k + 1] = x_next
            if k + 1 == n:
                self.FR[k] = self._field(t + h, x_next, self._delayed(self.S_end[k], self.Z_end[k], x_next, k, k + 1))
                break
            right = self._field(
                float(nodes[k + 1]), x_next, self._delayed(self.S_start[k + 1], self.Z_start[k + 1], x_next, k, k + 1)
            )
            self.FL[k + 1] = right
            if round(float(nodes[k + 1]), 12) in bp_set:
                self.FR[k] = self._field(t + h, x_next, self._delayed(self.S_end[k], self.Z_end[k], x_next, k, k + 1))
            else:
                self.FR[k] = right
        return Trajectory(nodes, self.X, self.FL, self.FR, self.history, self.span, breakpoints)


def _as_system(
    sys: Union[SystemSpec, BoundMatrices],
    bundle: DelayBundle,
    history: AnyHistory,
    delay_bound: Optional[float],
    t0: float,
    t_end: float,
) -> SystemSpec:
    if isinstance(sys, SystemSpec):
        return sys
    if delay_bound is None:
        delay_bound = history.span or bundle.upper_bound()
    if delay_bound is None and bundle.width:
        sampled = float(bundle.values(bundle.sample_times(t0, t_end, 1e-3 * max(1.0, t_end - t0))).max())
        delay_bound = sampled if sampled > 0 else None
    if delay_bound is None:
        delay_bound = 1.0
    return linear_system(sys, delay_bound)


def integrate(
    sys: Union[SystemSpec, BoundMatrices],
    h,
    phi: AnyHistory,
    t_end: float,
    step: Optional[float] = None,
    t0: float = 0.0,
    delay_bound: Optional[float] = None,
) -> Trajectory:
    """Integrate x' = f(t, x, x(t - h(t))) (or the linear field of bound matrices) on [t0, t_end].

    `phi` is read as x(t0 + s) for s in [-T, 0].
    """

    bundle = as_bundle(h)
    system = _as_system(sys, bundle, phi, delay_bound, t0, t_end)
    if bundle.width != system.delay_count:
        raise ConfigurationError(f"{system.name} reads {system.delay_count} delays, the signal provides {bundle.width}")
    if phi.dim != system.dim:
        raise ConfigurationError(f"history has {phi.dim} components, {system.name} has {system.dim}")
    if t_end <= t0:
        raise ConfigurationError(f"t_end must exceed t0 = {t0}, got {t_end}")
    span = max(system.delay_bound, bundle.upper_bound() or 0.0)
    step = step if step is not None else default_step(span)
    if step <= 0:
        raise ConfigurationError(f"step must be positive, got {step}")
    check_delay_range(bundle, span, t0, t_end, resolution=min(1e-3 * span, step))
    min_delay = bundle.min_positive_delay(t0, t_end, min(1e-3 * span, step))
    effective = min(step, 0.5 * min_delay)
    lattice = bundle.breakpoints(t0, t_end)
    seeds = np.concatenate([[t0], lattice])
    images = image_breakpoints(bundle, seeds, t0, t_end, effective)
    breakpoints = _merge_close(np.concatenate([seeds, images]), t_end)
    nodes = build_grid(t0, t_end, effective, breakpoints)
    LOGGER.debug(
        "Integrating %s on [%.6g, %.6g]: %d steps, %d breakpoints", system.name, t0, t_end, nodes.size - 1, breakpoints.size
    )
    return _MethodOfSteps(system, bundle, phi, span, nodes).run(breakpoints)


def window(traj: Trajectory, t: float, points: Optional[int] = None):
    """The segment s -> x(t + s), s in [-T, 0], resampled as a history.

    The grid is the standard history grid joined with every trajectory node
    inside the window, so Hermite pieces of the trajectory are reproduced.
    """

    slack = 1e-9 * max(1.0, abs(traj.t1))
    if t < traj.t0 - slack or t > traj.t1 + slack:
        raise ConfigurationError(f"window time {t:.6g} outside [{traj.t0:.6g}, {traj.t1:.6g}]")
    t = min(max(t, traj.t0), traj.t1)
    count = points or get_settings().integrator.history_grid
    grid = np.linspace(t - traj.span, t, count)
    inside = traj.nodes[(traj.nodes > t - traj.span) & (traj.nodes < t)]
    grid = _merge_close(np.concatenate([grid, inside]), abs(t) + traj.span)
    grid[-1] = t
    samples = traj.evaluate(grid)
    right = traj.derivative(grid, side="right")
    left = traj.derivative(grid, side="left")
    return SampledHistory(grid=grid - t, samples=samples, slopes=right, end_slopes=left, span=traj.span)


def check_positivity(
    bounds: BoundMatrices,
    h,
    phi: AnyHistory,
    t_end: float,
    step: Optional[float] = None,
    delay_bound: Optional[float] = None,
) -> PositivityReport:
    """Integrate the linear comparison system from phi >= 0 and report its grid minimum."""

    if np.any(phi.values(phi.sample_grid(phi.span or delay_bound or 1.0, 257)) < 0):
        raise ConfigurationError("positivity check needs a componentwise nonnegative history")
    traj = integrate(bounds, h, phi, t_end, step=step, delay_bound=delay_bound)
    times = traj.dense_times(2)
    values = np.real(traj.evaluate(times))
    flat = int(np.argmin(values))
    row, comp = divmod(flat, values.shape[1])
    minimum = float(values[row, comp])
    floor = get_settings().integrator.positivity_floor
    return PositivityReport(passed=minimum >= floor, minimum=minimum, arg_t=float(times[row]), arg_component=comp)


def decay_fit(traj: Trajectory, t_skip: float = 0.0, refine: int = 1) -> DecayFit:
    """Least-squares fit of log ||x(t)|| against t on [t_skip, t1] (samples above 1e-13)."""

    times = traj.dense_times(refine, t_skip, traj.t1)
    norms = traj.norms(times)
    keep = norms > 1e-13
    if keep.sum() < 3:
        raise ConfigurationError(f"decay fit needs at least 3 samples with ||x|| > 1e-13, got {int(keep.sum())}")
    slope, intercept = np.polyfit(times[keep], np.log(norms[keep]), 1)
    fitted = intercept + slope * times[keep]
    residual = float(np.sqrt(np.mean((np.log(norms[keep]) - fitted) ** 2)))
    return DecayFit(rate=float(-slope), prefactor=float(np.exp(intercept)), residual=residual, samples=int(keep.sum()))


__all__ = [
    "PositivityReport",
    "DecayFit",
    "integrate",
    "window",
    "check_positivity",
    "decay_fit",
    "build_grid",
    "image_breakpoints",
    "default_step",
]
