import numpy as np
import pytest

from delaygauge.core.errors import ConfigurationError
from delaygauge.discretize.companion import (
    build_companion,
    companion_family,
    companion_to_csv,
    evaluation_map,
    family_radius_report,
    kernel_check,
    product_radius_check,
    table_frame,
    verify_semiconjugacy,
)
from delaygauge.discretize.litau import approximate_delay
from delaygauge.model.catalog import catalog
from delaygauge.model.delays import ConstantDelay, LiTauDelay, ModDelay, quasiperiodic_delay
from delaygauge.model.history import constant_history


def test_constant_delay_approximation():
    approx = approximate_delay(ConstantDelay(values=[3.0]), 0.1, 2.0)
    assert approx.delay.n_tau == 31
    assert approx.delay.T_prime == pytest.approx(3.1)
    assert approx.delay.intervals == 20
    assert set(approx.delay.table[0]) == {30}
    assert approx.sup_error <= 0.1
    assert approx.modulus == pytest.approx(0.0)
    assert approx.within_bound


def test_sawtooth_delay_is_reproduced_exactly():
    approx = approximate_delay(ModDelay(period=2.0), 0.5, 4.0)
    assert approx.delay.table == [[0, 1, 2, 3, 0, 1, 2, 3]]
    assert approx.delay.n_tau == 5
    assert approx.sup_error < 1e-9
    assert approx.within_bound


def test_sinusoid_delay_error_within_modulus_bound():
    approx = approximate_delay(quasiperiodic_delay(), 0.1, 5.0, delay_bound=6.0)
    assert approx.delay.n_tau == 61
    assert approx.within_bound
    assert approx.sup_error <= approx.bound


def test_alignment_and_window_errors():
    with pytest.raises(ConfigurationError):
        approximate_delay(ModDelay(period=2.0), 0.3, 4.0)
    with pytest.raises(ConfigurationError):
        approximate_delay(ConstantDelay(values=[1.0]), 0.5, 2.0, T_prime=1.25)
    with pytest.raises(ConfigurationError):
        approximate_delay(ConstantDelay(values=[1.0]), 0.5, 2.0, T_prime=1.0)
    with pytest.raises(ConfigurationError):
        approximate_delay(ConstantDelay(values=[1.0]), 0.0, 2.0)


def test_explicit_window_is_kept():
    approx = approximate_delay(ConstantDelay(values=[1.0]), 0.5, 2.0, T_prime=2.0)
    assert approx.delay.n_tau == 4
    assert approx.delay.T_prime == pytest.approx(2.0)


def test_default_window_has_one_step_of_slack():
    assert approximate_delay(ConstantDelay(values=[1.0]), 0.5, 2.0).delay.n_tau == 3
    assert approximate_delay(ConstantDelay(values=[1.0]), 0.5, 2.0, T_prime=1.5).delay.n_tau == 3
    uneven = approximate_delay(ConstantDelay(values=[1.0]), 0.3, 2.1).delay
    assert uneven.n_tau == 5
    assert uneven.T_prime == pytest.approx(1.5)


def test_companion_layout():
    bounds = catalog("is-example").bounds
    companion = build_companion(bounds, 0.5, indices=[2], n_tau=3)
    assert companion.size == 8
    matrix = companion.matrix
    assert np.allclose(matrix[2:, :6], np.eye(6))
    assert np.allclose(matrix[:2, 2:4], 0.0)
    assert np.allclose(matrix[:2, 6:], 0.0)
    vector = np.arange(8, dtype=float)
    assert np.allclose(companion.apply(vector), matrix @ vector)


def test_companion_argument_errors():
    bounds = catalog("is-example").bounds
    with pytest.raises(ConfigurationError):
        build_companion(bounds, 0.5)
    with pytest.raises(ConfigurationError):
        build_companion(bounds, 0.5, indices=[4], n_tau=3)
    with pytest.raises(ConfigurationError):
        build_companion(bounds, 0.5, indices=[0, 1], n_tau=3)


def test_family_size_and_radii():
    is_bounds = catalog("is-example").bounds
    assert len(companion_family(is_bounds, 0.5, 3)) == 4
    report = family_radius_report(is_bounds, 0.5, 3)
    assert report.members == 4
    assert report.max_radius < 1.0
    assert report.at_least_one == []

    nis = family_radius_report(catalog("nis-example").bounds, 0.5, 3)
    assert [0] in nis.at_least_one
    assert nis.max_radius >= 1.0


def test_evaluation_map_needs_deep_history():
    phi = constant_history([1.0, 2.0], span=1.0)
    assert evaluation_map(phi, 0.5, 2).tolist() == [1.0, 2.0, 1.0, 2.0, 1.0, 2.0]
    with pytest.raises(ConfigurationError):
        evaluation_map(phi, 0.5, 3)


@pytest.mark.parametrize("tau", [0.5, 0.1])
def test_companion_products_match_closed_form_steps(tau):
    li = approximate_delay(ModDelay(period=2.0), tau, 4.0).delay
    phi = constant_history([1.0, 1.0], span=li.T_prime)
    report = verify_semiconjugacy(catalog("is-example").bounds, li, phi, steps=min(li.intervals, 20))
    assert report.passed
    assert report.discrepancy <= report.threshold


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_companion_products_over_fifty_fine_steps(seed):
    rng = np.random.default_rng(seed)
    li = LiTauDelay(tau=0.1, n_tau=30, table=[rng.integers(0, 31, size=50).tolist()])
    phi = constant_history(rng.uniform(-1.0, 1.0, size=2).tolist(), span=li.T_prime)
    report = verify_semiconjugacy(catalog("is-example").bounds, li, phi, steps=50)
    assert report.steps == 50
    assert report.passed


def test_history_vanishing_on_lattice_stays_zero():
    li = approximate_delay(ModDelay(period=2.0), 0.5, 4.0).delay
    report = kernel_check(catalog("is-example").bounds, li)
    assert report.passed
    assert report.steps == li.n_tau
    with pytest.raises(ConfigurationError):
        kernel_check(catalog("is-example").bounds, li, phi=constant_history([1.0, 1.0], span=li.T_prime))


def test_product_radius_matches_power_iteration():
    li = approximate_delay(ConstantDelay(values=[1.0]), 0.5, 3.0).delay
    report = product_radius_check(catalog("is-example").bounds, li, max_length=3)
    assert report.passed
    assert [row.length for row in report.rows] == [1, 2, 3]


def test_companion_and_table_export(tmp_path):
    bounds = catalog("is-example").bounds
    li = LiTauDelay(tau=0.5, n_tau=3, table=[[2, 1, 0]])
    companion = build_companion(bounds, li, interval=1)
    assert companion.indices == [1]
    path = companion_to_csv(companion, tmp_path / "companion.csv")
    assert np.allclose(np.loadtxt(path, delimiter=","), companion.matrix, rtol=0, atol=0)
    frame = table_frame(li)
    assert list(frame.columns) == ["k", "n1"]
    assert frame["n1"].tolist() == [2, 1, 0]


def test_exact_step_of_scalar_system():
    from delaygauge.integrate.exact import exact_step_linear
    from delaygauge.model.bounds import BoundMatrices

    bounds = BoundMatrices(M0=[[-1.0]], Mi=[[[0.5]]])
    li = LiTauDelay(tau=0.1, n_tau=3, table=[[3]])
    out = exact_step_linear(bounds, li, np.ones(4), 1)
    expected = np.exp(-0.1) + (1.0 - np.exp(-0.1)) * 0.5
    assert out[1][0] == pytest.approx(expected, abs=1e-12)
    assert out[1][0] == pytest.approx(0.952419, abs=1e-6)
    assert np.allclose(out[1][1:], 1.0)
    with pytest.raises(ConfigurationError):
        exact_step_linear(bounds, li, np.ones(4), 2)
