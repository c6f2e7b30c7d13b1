"""Falsification-style check that the linear comparison flow dominates
differences of nonlinear solutions: |S[phi1] - S[phi2]| <= R[|phi1 - phi2|].
"""
from __future__ import annotations

import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from delaygauge.core.config import get_settings
from delaygauge.core.errors import ConfigurationError
from delaygauge.integrate.solver import integrate
from delaygauge.model.bounds import BoundMatrices
from delaygauge.model.catalog import catalog
from delaygauge.model.delays import (
    ConstantDelay,
    ModDelay,
    SinusoidComponent,
    SinusoidSumDelay,
    SinusoidTerm,
    as_bundle,
)
from delaygauge.model.history import AnyHistory, abs_difference, random_constant_history
from delaygauge.model.system import SystemSpec

LOGGER = logging.getLogger(__name__)


class ComparisonReport(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    passed: bool = Field(alias="pass")
    max_violation: float
    arg_t: float
    arg_component: int


def verify_comparison(
    system: SystemSpec,
    bounds: BoundMatrices,
    phi1: AnyHistory,
    phi2: AnyHistory,
    h,
    t_end: float,
    tol: float = 1e-6,
    step: Optional[float] = None,
) -> ComparisonReport:
    """Integrate S from phi1 and phi2 and R from |phi1 - phi2|; check |x1 - x2| <= r + tol on the dense grid."""

    floor = 10.0 * get_settings().integrator.interpolation_tol
    if tol < floor:
        raise ConfigurationError(f"tol {tol:.1e} is below the integrator noise floor {floor:.1e}")
    if bounds.coordinates != "state":
        raise ConfigurationError("comparison needs bounds in the state coordinates of the system")
    if bounds.dim != system.dim or bounds.delay_count != system.delay_count:
        raise ConfigurationError(
            f"bounds are {bounds.dim}-dimensional with {bounds.delay_count} delays, "
            f"{system.name} is {system.dim}-dimensional with {system.delay_count}"
        )
    if phi1.dim != system.dim or phi2.dim != system.dim:
        raise ConfigurationError("history dimensions must match the system")
    bundle = as_bundle(h)
    x1 = integrate(system, bundle, phi1, t_end, step=step)
    x2 = integrate(system, bundle, phi2, t_end, step=step)
    r = integrate(bounds, bundle, abs_difference(phi1, phi2), t_end, step=step, delay_bound=system.delay_bound)
    times = x1.dense_times(2)
    gap = np.abs(x1.evaluate(times) - x2.evaluate(times)) - np.real(r.evaluate(times))
    flat = int(np.argmax(gap))
    row, comp = divmod(flat, gap.shape[1])
    worst = float(gap[row, comp])
    report = ComparisonReport(passed=worst <= tol, max_violation=worst, arg_t=float(times[row]), arg_component=comp)
    if not report.passed:
        LOGGER.warning("Comparison violated by %.3e at t = %.6g, component %d", worst, report.arg_t, comp)
    return report


def random_delay(rng: np.random.Generator, T: float):
    """A constant, t mod P or sinusoid-sum delay with values in [0, T]."""

    kind = rng.integers(3)
    if kind == 0:
        return ConstantDelay(values=[float(rng.uniform(0.2, T))])
    if kind == 1:
        return ModDelay(period=float(rng.uniform(0.5, T)))
    offset = T / 2.0
    amp = float(rng.uniform(0.1, 0.45)) * T
    return SinusoidSumDelay(
        components=[
            SinusoidComponent(
                offset=offset,
                terms=[SinusoidTerm(amplitude=amp, frequency=float(rng.uniform(0.5, 4.0)), phase=float(rng.uniform(0, np.pi)))],
            )
        ]
    )


def random_comparison_trials(
    trials: int,
    seed: Optional[int] = None,
    t_end: float = 30.0,
    step: float = 1e-3,
    tol: float = 1e-6,
    names: tuple = ("nis-example", "is-example"),
) -> List[ComparisonReport]:
    """Random catalog system, delay signal and history pair (1-norm at most 2) per trial."""

    rng = np.random.default_rng(get_settings().reduction.seed if seed is None else seed)
    reports = []
    for trial in range(trials):
        entry = catalog(names[int(rng.integers(len(names)))])
        T = entry.system.delay_bound
        h = random_delay(rng, T)
        phi1 = random_constant_history(rng, entry.system.dim)
        phi2 = random_constant_history(rng, entry.system.dim)
        report = verify_comparison(entry.system, entry.bounds, phi1, phi2, h, t_end, tol=tol, step=step)
        LOGGER.debug("Trial %d (%s, %s): violation %.3e", trial, entry.name, h.type, report.max_violation)
        reports.append(report)
    return reports


__all__ = ["ComparisonReport", "verify_comparison", "random_delay", "random_comparison_trials"]
