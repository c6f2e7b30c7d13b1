import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from delaygauge.core.errors import ConfigurationError, DegenerateSignalError
from delaygauge.integrate.solver import integrate
from delaygauge.model.catalog import linear_entry
from delaygauge.model.delays import ConstantDelay, ModDelay
from delaygauge.model.history import constant_history
from delaygauge.model.system import SystemSpec
from delaygauge.stability.reservoirs import reservoir2_analysis
from delaygauge.reservoir.consistency import (
    consistency_correlation,
    consistency_sweep,
    stationarity_drift,
    sweep_to_csv,
)
from delaygauge.reservoir.inputs import InputSignal, load_input, lorenz_input, synthetic_input
from delaygauge.reservoir.simulate import (
    Reservoir2Config,
    random_history_pair,
    simulate_reservoir1,
    simulate_reservoir2,
    terminal_gap,
)


def oscillating(phi_value):
    system = linear_entry(M0=[[0.0]], Mi=[[[-1.0]]], T=1.0).system
    return integrate(system, ConstantDelay(values=[1.0]), constant_history([phi_value]), 10.0, step=0.01)


def test_lorenz_input():
    J = lorenz_input(5.0)
    assert J.source == "lorenz-x"
    assert J(0.0) == pytest.approx(1.0)
    assert J.covers(0.0, 5.0)
    assert not J.covers(0.0, 6.0)
    assert np.all(np.isfinite(J.sample(np.linspace(0.0, 5.0, 11))))
    assert lorenz_input(5.0, component="z").source == "lorenz-z"
    with pytest.raises(ConfigurationError):
        lorenz_input(5.0, dt=0.05)
    with pytest.raises(ConfigurationError):
        lorenz_input(0.0)


def test_input_signal_validation():
    with pytest.raises(ValueError):
        InputSignal(times=[0.0, 0.0, 1.0], values=[1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        InputSignal(times=[0.0, 1.0], values=[1.0])
    with pytest.raises(ValueError):
        InputSignal(times=[0.0, 1.0], values=[1.0, math.nan])
    signal = synthetic_input(2.0, frequencies=[1.0], amplitudes=[2.0])
    assert signal(1.0) == pytest.approx(2.0 * math.sin(1.0), abs=1e-8)
    assert signal.width == 1


def test_load_input(tmp_path):
    path = tmp_path / "u.csv"
    path.write_text("t,u1,u2\n0,0,1\n1,1,2\n2,4,3\n")
    signal = load_input(path)
    assert signal.source == "file"
    assert signal.width == 2
    assert signal(1.0) == pytest.approx([1.0, 2.0])
    bad = tmp_path / "bad.csv"
    bad.write_text("time,u\n0,1\n1,2\n")
    with pytest.raises(ConfigurationError):
        load_input(bad)


def test_reservoir1_zero_is_fixed_point():
    traj = simulate_reservoir1(t_end=5.0, step=0.01)
    assert np.all(traj.states == 0.0)


def test_reservoir1_without_delay_matches_ode():
    g, rho = 1.0, 0.9
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    traj = simulate_reservoir1(
        g=g, rho=rho, h=ConstantDelay(values=[0.0]), phi=constant_history([0.5, -0.3]), t_end=5.0, step=1e-2, T=1.0
    )

    def field(t, x):
        return -g * (x + np.tanh(rho * A @ x))

    ref = solve_ivp(field, (0.0, 5.0), [0.5, -0.3], rtol=1e-11, atol=1e-12)
    assert np.allclose(traj.final_state(), ref.y[:, -1], atol=1e-7)


def test_reservoir1_rejects_wide_delay():
    with pytest.raises(ConfigurationError):
        simulate_reservoir1(h=ConstantDelay(values=[0.5, 0.5]), t_end=1.0, step=0.01)


def test_reservoir2_config_validation():
    with pytest.raises(ValueError):
        Reservoir2Config(taus=[-0.1])
    with pytest.raises(ValueError):
        Reservoir2Config(beta=0.0)
    cfg = Reservoir2Config()
    assert cfg.count == 3
    assert cfg.delay_bound == pytest.approx(1.0)


def test_reservoir2_input_must_cover_run():
    with pytest.raises(ConfigurationError):
        simulate_reservoir2(Reservoir2Config(), lorenz_input(5.0), None, 10.0, step=0.01)


def test_stable_reservoir_gives_consistent_responses():
    assert reservoir2_analysis(1.0 / 3.0, 0.125).abscissa == pytest.approx(-0.0139, abs=1e-3)
    J = lorenz_input(35.0)
    cfg = Reservoir2Config()
    rng = np.random.default_rng(0)
    for _ in range(5):
        phi1, phi2 = random_history_pair(rng, 2)
        x = simulate_reservoir2(cfg, J, phi1, 35.0, step=0.01)
        y = simulate_reservoir2(cfg, J, phi2, 35.0, step=0.01)
        assert consistency_correlation(x, y, 30.0, t_skip=5.0) >= 0.99


def test_random_history_pair_stays_near_rest():
    phi1, phi2 = random_history_pair(np.random.default_rng(3), 2)
    assert np.all(np.abs(phi1.values_) <= 0.02)
    assert np.all(np.abs(phi2.values_) <= 0.02)
    wide, _ = random_history_pair(np.random.default_rng(3), 2, amplitude=1.0)
    assert np.all(np.abs(wide.values_) <= 1.0)
    with pytest.raises(ConfigurationError):
        random_history_pair(np.random.default_rng(3), 2, amplitude=0.0)


@pytest.mark.parametrize("h", [ConstantDelay(values=[1.0]), ModDelay(period=1.0)], ids=["constant", "mod"])
def test_driven_reservoir1_histories_converge(h):
    u = synthetic_input(40.0, frequencies=[1.1, 0.37], amplitudes=[3.0, 2.0])
    W = [[1.0], [-1.0]]
    phi1, phi2 = random_history_pair(np.random.default_rng(5), 2, amplitude=1.0)
    x = simulate_reservoir1(g=1.0, rho=0.9, W=W, h=h, u=u, phi=phi1, t_end=40.0, step=0.01, T=1.0)
    y = simulate_reservoir1(g=1.0, rho=0.9, W=W, h=h, u=u, phi=phi2, t_end=40.0, step=0.01, T=1.0)
    initial = float(np.abs(np.subtract(phi1.values_, phi2.values_)).sum())
    assert terminal_gap(x, y) < 1e-3 * initial


def test_correlation_of_identical_and_reflected_responses():
    x = oscillating(1.0)
    assert consistency_correlation(x, x, 8.0, t_skip=2.0) == pytest.approx(1.0, abs=1e-9)
    assert consistency_correlation(x, oscillating(-1.0), 8.0, t_skip=2.0) == pytest.approx(-1.0, abs=1e-9)
    assert consistency_correlation(x, oscillating(2.5), 8.0, t_skip=2.0) == pytest.approx(1.0, abs=1e-9)


def test_correlation_is_symmetric():
    system = linear_entry(M0=[[-0.5]], Mi=[[[-1.0]]], T=1.0).system
    x = oscillating(1.0)
    y = integrate(system, ConstantDelay(values=[1.0]), constant_history([1.0]), 10.0, step=0.01)
    assert consistency_correlation(x, y, 8.0, t_skip=2.0) == pytest.approx(consistency_correlation(y, x, 8.0, t_skip=2.0))


def test_correlation_errors():
    flat = integrate(linear_entry(M0=[[0.0]], Mi=[[[0.0]]], T=1.0).system, ConstantDelay(values=[1.0]), constant_history([1.0]), 10.0, step=0.05)
    with pytest.raises(DegenerateSignalError):
        consistency_correlation(flat, flat, 8.0, t_skip=2.0)
    x = oscillating(1.0)
    with pytest.raises(ConfigurationError):
        consistency_correlation(x, x, 20.0, t_skip=2.0)
    with pytest.raises(ConfigurationError):
        consistency_correlation(x, x, 0.0, t_skip=2.0)


def test_stationarity_drift():
    def rhs(t, x, ys):
        return -2.0 * x + 0.5 * ys[0] + 1.0 + math.sin(2.0 * math.pi * t)

    forced = SystemSpec(name="forced", dim=1, delay_count=1, delay_bound=1.0, rhs=rhs, autonomous=False)
    periodic = integrate(forced, ModDelay(period=1.0), constant_history([0.0]), 20.0, step=0.01)
    assert stationarity_drift(periodic, 10.0, t_skip=10.0).stationary

    decay = integrate(linear_entry(M0=[[-1.0]], Mi=[[[0.0]]], T=1.0).system, ConstantDelay(values=[1.0]), constant_history([1.0]), 10.0, step=0.01)
    report = stationarity_drift(decay, 10.0, t_skip=0.0)
    assert not report.stationary
    assert report.drift > 0.1


def test_sweep_reports_region_and_writes_csv(tmp_path):
    rows = consistency_sweep([1.0 / 3.0], [0.125, 0.3], T=10.0, t_skip=5.0, step=0.02, seed=3)
    assert [row.delta for row in rows] == [0.125, 0.3]
    assert rows[0].region_ok and not rows[1].region_ok
    assert rows[0].abscissa < 0
    assert math.isnan(rows[1].abscissa)
    assert -1.0 - 1e-9 <= rows[0].gamma_sq <= 1.0 + 1e-9
    path = sweep_to_csv(rows, tmp_path / "sweep.csv")
    assert path.read_text().splitlines()[0] == "beta,delta,abscissa,region_ok,gamma_sq"

    threaded = consistency_sweep([1.0 / 3.0], [0.125, 0.3], T=10.0, t_skip=5.0, step=0.02, seed=3, threads=2)
    assert [row.gamma_sq for row in threaded] == pytest.approx([row.gamma_sq for row in rows], nan_ok=True)
