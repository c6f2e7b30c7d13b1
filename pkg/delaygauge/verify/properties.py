"""Empirical checks of flow-map properties on integrated trajectories."""
from __future__ import annotations

import logging
import math
from typing import Callable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from delaygauge.core.errors import ConfigurationError
from delaygauge.integrate.solver import integrate
from delaygauge.integrate.trajectory import Trajectory
from delaygauge.model.delays import ConstantDelay, SinusoidComponent, SinusoidSumDelay, as_bundle
from delaygauge.model.history import AnyHistory
from delaygauge.model.system import SystemSpec

LOGGER = logging.getLogger(__name__)


class GronwallReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool
    worst_ratio: float
    times: List[float]
    observed: List[float]
    bound: List[float]


class ContinuityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool
    perturbations: List[float]
    responses: List[float]


class LimitCycleReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool
    period: float
    distances: List[float]


class RefinementRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    step: float
    error: float
    ratio: Optional[float] = None
    order: Optional[float] = None


class RefinementReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    rows: List[RefinementRow]
    min_ratio: Optional[float]


def _window_sup(a: Trajectory, b: Trajectory, t: float, shift: float = 0.0, points: int = 257) -> float:
    """sup over s in [-T, 0] of ||a(t + s) - b(t + shift + s)||."""

    s = np.linspace(-a.span, 0.0, points)
    s = np.unique(np.concatenate([s, a.nodes[(a.nodes > t - a.span) & (a.nodes < t)] - t]))
    return float(np.abs(a.evaluate(t + s) - b.evaluate(t + shift + s)).sum(axis=1).max())


def gronwall_check(
    system: SystemSpec,
    h,
    phi1: AnyHistory,
    phi2: AnyHistory,
    t_end: float = 5.0,
    step: Optional[float] = None,
    samples: int = 21,
    lipschitz: Optional[float] = None,
) -> GronwallReport:
    """sup over [t - T, t] of ||x1 - x2|| against e^{L0 (r + 1) t} ||phi1 - phi2||_C0."""

    L0 = lipschitz if lipschitz is not None else system.lipschitz
    if L0 is None:
        raise ConfigurationError(f"{system.name} has no known Lipschitz constant")
    x1 = integrate(system, h, phi1, t_end, step=step)
    x2 = integrate(system, h, phi2, t_end, step=step)
    grid = np.linspace(-x1.span, 0.0, 513)
    initial = float(np.abs(phi1.values(grid) - phi2.values(grid)).sum(axis=1).max())
    times = np.linspace(0.0, t_end, samples)
    observed = [_window_sup(x1, x2, float(t)) for t in times]
    rate = L0 * (system.delay_count + 1)
    bound = [math.exp(rate * float(t)) * initial for t in times]
    ratios = [o / b if b > 0 else (0.0 if o == 0 else math.inf) for o, b in zip(observed, bound)]
    worst = max(ratios)
    return GronwallReport(
        passed=worst <= 1.0 + 1e-6,
        worst_ratio=worst,
        times=times.tolist(),
        observed=observed,
        bound=bound,
    )


def shift_delay(signal, amount: float):
    """The same signal moved up by `amount` (constant and sinusoid-sum signals)."""

    if isinstance(signal, ConstantDelay):
        return ConstantDelay(values=[v + amount for v in signal.values_])
    if isinstance(signal, SinusoidSumDelay):
        return SinusoidSumDelay(
            components=[SinusoidComponent(offset=c.offset + amount, terms=c.terms) for c in signal.components]
        )
    raise ConfigurationError(f"cannot shift a '{signal.type}' delay")


def delay_continuity_check(
    system: SystemSpec,
    h,
    phi: AnyHistory,
    t_end: float,
    perturbation: float = 0.1,
    halvings: int = 3,
    step: Optional[float] = None,
    perturb: Optional[Callable[[float], object]] = None,
) -> ContinuityReport:
    """Responses sup ||S^g[phi] - S^h[phi]|| for perturbations eps, eps/2, ...

    Passes when the last response is below the first and no halving more
    than doubles the response (ideal linear behaviour halves it).
    """

    make = perturb or (lambda eps: shift_delay(h, eps))
    base = integrate(system, h, phi, t_end, step=step)
    grid = base.dense_times(2)
    reference = base.evaluate(grid)
    eps_list, responses = [], []
    for k in range(halvings + 1):
        eps = perturbation / 2**k
        moved = integrate(system, make(eps), phi, t_end, step=step)
        responses.append(float(np.abs(moved.evaluate(grid) - reference).sum(axis=1).max()))
        eps_list.append(eps)
    ok = responses[-1] < responses[0] or responses[0] == 0.0
    for a, b in zip(responses[:-1], responses[1:]):
        if b > 2.0 * a + 1e-12:
            ok = False
    return ContinuityReport(passed=ok, perturbations=eps_list, responses=responses)


def limit_cycle_check(
    system: SystemSpec,
    h,
    phi: AnyHistory,
    period: float,
    cycles: int = 15,
    tol: float = 1e-6,
    step: Optional[float] = None,
) -> LimitCycleReport:
    """Distances ||window(t) - window(t + P)||_C0 at t = T, T + P, ...; they must decay below tol."""

    start = max(system.delay_bound, as_bundle(h).upper_bound() or 0.0)
    traj = integrate(system, h, phi, start + period * cycles, step=step)
    distances = [
        _window_sup(traj, traj, start + k * period, shift=period) for k in range(cycles)
    ]
    passed = distances[-1] <= tol and distances[-1] <= distances[0]
    LOGGER.info("Period-%.6g window distances fell from %.3e to %.3e", period, distances[0], distances[-1])
    return LimitCycleReport(passed=passed, period=period, distances=distances)


def refinement_study(
    system: SystemSpec,
    h,
    phi: AnyHistory,
    t_end: float,
    steps: Sequence[float],
    reference: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    samples: int = 101,
) -> RefinementReport:
    """Errors at each step against `reference` (or a run at step / 8 of the smallest step)."""

    times = np.linspace(0.0, t_end, samples)
    if reference is None:
        ref_traj = integrate(system, h, phi, t_end, step=min(steps) / 8.0)
        target = ref_traj.evaluate(times)
    else:
        target = np.asarray(reference(times)).reshape(times.size, -1)
    rows: List[RefinementRow] = []
    previous = None
    for step in sorted(steps, reverse=True):
        traj = integrate(system, h, phi, t_end, step=step)
        error = float(np.abs(traj.evaluate(times) - target).sum(axis=1).max())
        ratio = previous / error if previous is not None and error > 0 else None
        order = math.log2(ratio) if ratio else None
        rows.append(RefinementRow(step=step, error=error, ratio=ratio, order=order))
        previous = error
    ratios = [row.ratio for row in rows if row.ratio is not None]
    return RefinementReport(rows=rows, min_ratio=min(ratios) if ratios else None)


__all__ = [
    "GronwallReport",
    "ContinuityReport",
    "LimitCycleReport",
    "RefinementReport",
    "RefinementRow",
    "gronwall_check",
    "shift_delay",
    "delay_continuity_check",
    "limit_cycle_check",
    "refinement_study",
]
