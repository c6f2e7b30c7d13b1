import numpy as np
import pytest

from delaygauge.core.errors import ConfigurationError
from delaygauge.model.catalog import catalog, linear_entry, reservoir2_entry
from delaygauge.model.delays import ConstantDelay, ModDelay, quasiperiodic_delay
from delaygauge.model.history import constant_history
from delaygauge.verify.comparison import random_comparison_trials, random_delay, verify_comparison


def test_comparison_holds_for_stable_example():
    entry = catalog("is-example")
    report = verify_comparison(
        entry.system,
        entry.bounds,
        constant_history([0.5, -0.3]),
        constant_history([-0.2, 0.4]),
        ModDelay(period=2.0),
        10.0,
        step=0.01,
    )
    assert report.passed
    assert report.max_violation <= 1e-6
    assert report.model_dump(by_alias=True)["pass"] is True


def test_comparison_holds_for_unstable_example():
    entry = catalog("nis-example")
    report = verify_comparison(
        entry.system,
        entry.bounds,
        constant_history([0.3, 0.1]),
        constant_history([-0.1, 0.2]),
        ConstantDelay(values=[1.0]),
        8.0,
        step=0.01,
    )
    assert report.passed


def test_comparison_with_sinusoid_delay():
    entry = catalog("is-example", T=6.0)
    report = verify_comparison(
        entry.system,
        entry.bounds,
        constant_history([1.0, 0.0]),
        constant_history([0.0, 1.0]),
        quasiperiodic_delay(),
        10.0,
        step=0.01,
    )
    assert report.passed


def test_random_trials_pass():
    reports = random_comparison_trials(3, seed=11, t_end=6.0, step=0.01)
    assert len(reports) == 3
    assert all(r.passed for r in reports)


def test_hundred_short_random_trials_pass():
    reports = random_comparison_trials(100, seed=12, t_end=2.0, step=0.01)
    assert len(reports) == 100
    assert [i for i, r in enumerate(reports) if not r.passed] == []


@pytest.mark.slow
def test_hundred_random_trials_at_fine_step():
    reports = random_comparison_trials(100, seed=13, t_end=10.0, step=1e-3, tol=1e-6)
    assert [i for i, r in enumerate(reports) if not r.passed] == []


def test_random_delay_stays_in_range():
    rng = np.random.default_rng(4)
    for _ in range(20):
        h = random_delay(rng, 3.0)
        values = np.array([h(t) for t in np.linspace(0.0, 10.0, 101)])
        assert values.min() >= 0.0
        assert values.max() <= 3.0


def test_comparison_refuses_transformed_bounds():
    entry = reservoir2_entry()
    with pytest.raises(ConfigurationError):
        verify_comparison(
            entry.system,
            entry.bounds,
            constant_history([0.1, 0.0]),
            constant_history([0.0, 0.1]),
            ConstantDelay(values=[1.0] * entry.system.delay_count),
            1.0,
        )


def test_tolerance_below_noise_floor_is_rejected():
    entry = catalog("is-example")
    with pytest.raises(ConfigurationError):
        verify_comparison(
            entry.system,
            entry.bounds,
            constant_history([1.0, 0.0]),
            constant_history([0.0, 1.0]),
            ConstantDelay(values=[1.0]),
            1.0,
            tol=1e-12,
        )


def test_mismatched_bounds_are_rejected():
    entry = catalog("is-example")
    scalar = linear_entry(M0=[[-1.0]], Mi=[[[0.5]]], T=3.0)
    with pytest.raises(ConfigurationError):
        verify_comparison(
            entry.system,
            scalar.bounds,
            constant_history([1.0, 0.0]),
            constant_history([0.0, 1.0]),
            ConstantDelay(values=[1.0]),
            1.0,
        )
