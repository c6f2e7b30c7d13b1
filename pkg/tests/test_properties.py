import math

import numpy as np
import pytest

from delaygauge.core.errors import ConfigurationError
from delaygauge.model.catalog import catalog, linear_entry
from delaygauge.model.delays import ConstantDelay, ModDelay, quasiperiodic_delay
from delaygauge.model.history import constant_history
from delaygauge.model.system import SystemSpec
from delaygauge.verify.properties import (
    delay_continuity_check,
    gronwall_check,
    limit_cycle_check,
    refinement_study,
    shift_delay,
)


def forced_scalar():
    def rhs(t, x, ys):
        return -2.0 * x + 0.5 * ys[0] + 1.0 + math.sin(2.0 * math.pi * t)

    return SystemSpec(name="forced", dim=1, delay_count=1, delay_bound=1.0, rhs=rhs, autonomous=False, lipschitz=2.0)


def test_gronwall_bound_holds():
    system = catalog("is-example").system
    report = gronwall_check(system, ConstantDelay(values=[2.0]), constant_history([1.0, 0.0]), constant_history([0.5, 0.5]), t_end=3.0, step=0.01)
    assert report.passed
    assert report.worst_ratio <= 1.0 + 1e-6
    assert len(report.times) == len(report.observed) == len(report.bound)
    assert report.observed[0] == pytest.approx(1.0)


def test_gronwall_needs_lipschitz_constant():
    system = forced_scalar().model_copy(update={"lipschitz": None})
    with pytest.raises(ConfigurationError):
        gronwall_check(system, ConstantDelay(values=[0.5]), constant_history([1.0]), constant_history([0.0]))


def test_shift_delay():
    assert shift_delay(ConstantDelay(values=[1.0, 2.0]), 0.5).values_ == pytest.approx([1.5, 2.5])
    moved = shift_delay(quasiperiodic_delay(), 0.25)
    assert moved(0.0) == pytest.approx(quasiperiodic_delay()(0.0) + 0.25)
    with pytest.raises(ConfigurationError):
        shift_delay(ModDelay(period=1.0), 0.1)


def test_solutions_depend_continuously_on_delay():
    report = delay_continuity_check(
        catalog("is-example").system,
        ConstantDelay(values=[1.0]),
        constant_history([1.0, 1.0]),
        8.0,
        perturbation=0.2,
        halvings=3,
        step=0.01,
    )
    assert report.passed
    assert report.responses[-1] < report.responses[0]
    assert report.perturbations == pytest.approx([0.2, 0.1, 0.05, 0.025])


def test_periodic_forcing_settles_on_limit_cycle():
    report = limit_cycle_check(forced_scalar(), ModDelay(period=1.0), constant_history([0.0]), 1.0, cycles=20, step=0.01)
    assert report.passed
    assert report.distances[-1] < report.distances[0]


def test_refinement_against_reference_run():
    report = refinement_study(
        catalog("is-example").system,
        ConstantDelay(values=[3.0]),
        constant_history([1.0, 1.0]),
        6.0,
        steps=[0.2, 0.1, 0.05],
    )
    assert [row.step for row in report.rows] == [0.2, 0.1, 0.05]
    assert report.rows[0].ratio is None
    assert report.min_ratio >= 8.0


def test_refinement_against_closed_form():
    entry = linear_entry(M0=[[-1.0]], Mi=[[[0.0]]], T=1.0)
    report = refinement_study(
        entry.system,
        ConstantDelay(values=[1.0]),
        constant_history([1.0]),
        2.0,
        steps=[0.2, 0.1],
        reference=lambda t: np.exp(-t),
    )
    assert report.rows[-1].error < report.rows[0].error
    assert report.rows[-1].order == pytest.approx(4.0, abs=0.5)
