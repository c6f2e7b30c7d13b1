import math

import numpy as np
import pytest

from delaygauge.core.errors import ConfigurationError
from delaygauge.model.bounds import BoundMatrices
from delaygauge.model.catalog import catalog, linear_entry
from delaygauge.stability.analyzer import (
    complex_shift,
    estimate_bounds_by_sampling,
    local_stability_matrix,
    stability_matrix,
)
from delaygauge.stability.reservoirs import reservoir1_analysis, reservoir2_analysis, reservoir2_region


def test_worked_example_verdicts():
    nis = stability_matrix(catalog("nis-example").bounds)
    assert np.allclose(nis.stability_matrix, [[0.25, 0.25], [0.25, 0.25]])
    assert nis.abscissa == pytest.approx(0.5, abs=1e-12)
    assert not nis.intrinsically_stable
    assert nis.label == "NOT-INTRINSICALLY-STABLE"

    is_ = stability_matrix(catalog("is-example").bounds)
    assert np.allclose(is_.stability_matrix, [[-3.0, 1.0], [2.0, -1.0]])
    assert is_.abscissa == pytest.approx(-2.0 + math.sqrt(3.0), abs=1e-10)
    assert is_.intrinsically_stable
    assert is_.label == "STABLE"


def test_undelayed_identity():
    verdict = stability_matrix(BoundMatrices(M0=-np.eye(3)))
    assert verdict.abscissa == pytest.approx(-1.0)
    assert verdict.intrinsically_stable
    assert verdict.margin == pytest.approx(1.0)


def test_bounds_validation():
    with pytest.raises(ValueError):
        BoundMatrices(M0=[[-1.0, -0.5], [0.0, -1.0]])
    with pytest.raises(ValueError):
        BoundMatrices(M0=-np.eye(2), Mi=[[[-1.0, 0.0], [0.0, 0.0]]])
    with pytest.raises(ValueError):
        BoundMatrices(M0=-np.eye(2), Mi=[np.eye(3)])


def test_complex_system_gets_small_shift():
    entry = linear_entry(M0=[[-2.0 + 1.0j]], Mi=[[[0.5j]]])
    assert entry.system.complex_valued
    verdict = stability_matrix(entry.bounds, complex_valued=True)
    assert verdict.epsilon_shift == pytest.approx(min(1e-3, 1.5 / 10.0))
    assert verdict.abscissa == pytest.approx(-1.5 + verdict.epsilon_shift)
    assert verdict.intrinsically_stable
    assert complex_shift(entry.bounds) == pytest.approx(1e-3)


def test_scaling_and_monotonicity():
    rng = np.random.default_rng(5)
    for _ in range(25):
        M0 = -np.diag(rng.uniform(1.0, 3.0, size=3)) + np.abs(rng.normal(size=(3, 3))) * (1 - np.eye(3))
        M1 = rng.uniform(0.0, 1.0, size=(3, 3))
        bounds = BoundMatrices(M0=M0, Mi=[M1])
        base = stability_matrix(bounds).abscissa
        scaled = stability_matrix(bounds.scaled(2.5)).abscissa
        assert scaled == pytest.approx(2.5 * base, rel=1e-10, abs=1e-12)
        bumped = BoundMatrices(M0=M0, Mi=[M1 + rng.uniform(0.0, 0.2, size=(3, 3))])
        assert stability_matrix(bumped).abscissa >= base - 1e-12


def test_sampling_recovers_linear_bounds():
    entry = linear_entry(M0=[[-2.0, 0.5], [-1.0, -3.0]], Mi=[[[0.3, -0.2], [0.1, 0.4]]])
    bounds = estimate_bounds_by_sampling(entry.system, density=3)
    assert bounds.heuristic
    assert np.allclose(bounds.M0, [[-2.0, 0.5], [1.0, -3.0]], atol=1e-6)
    assert np.allclose(bounds.Mi[0], [[0.3, 0.2], [0.1, 0.4]], atol=1e-6)
    assert "relative to sampled box" in stability_matrix(bounds).label


def test_sampling_is_a_lower_estimate():
    entry = catalog("nis-example")
    bounds = estimate_bounds_by_sampling(entry.system, box=[(-2.0, 2.0)] * 2, density=9)
    assert np.all(bounds.Mi[0] <= entry.bounds.Mi[0] + 1e-6)
    assert np.allclose(bounds.Mi[0], entry.bounds.Mi[0], rtol=0.02)


def test_local_matrix_at_origin():
    verdict = local_stability_matrix(catalog("is-example").system, [0.0, 0.0])
    assert np.allclose(verdict.stability_matrix, [[-3.0, 1.0], [2.0, -1.0]], atol=1e-6)
    verdict = local_stability_matrix(catalog("nis-example").system, [0.0, 0.0])
    assert np.allclose(verdict.stability_matrix, [[0.25, 0.25], [0.25, 0.25]], atol=1e-6)


def test_local_matrix_rejects_non_fixed_point():
    with pytest.raises(ConfigurationError):
        local_stability_matrix(catalog("is-example").system, [1.0, 0.0])


def test_reservoir2_closed_form():
    analysis = reservoir2_analysis(1.0 / 3.0, 0.125)
    assert analysis.Delta == pytest.approx(math.sqrt(0.5))
    assert analysis.abscissa == pytest.approx(-0.0139, abs=1e-3)
    assert analysis.region_ok
    assert analysis.sign_consistent

    outside = reservoir2_analysis(0.45, 0.2)
    assert outside.abscissa > 0
    assert not outside.region_ok

    beta = 0.3
    boundary = reservoir2_analysis(beta, (1.0 - 4.0 * beta * beta) / 4.0)
    assert boundary.abscissa == pytest.approx(0.0, abs=1e-9)

    with pytest.raises(ConfigurationError):
        reservoir2_analysis(0.2, 0.25)


def test_reservoir2_sign_matches_region_on_grid():
    for beta in np.linspace(0.01, 0.49, 25):
        for delta in np.linspace(0.005, 0.245, 25):
            analysis = reservoir2_analysis(float(beta), float(delta))
            assert analysis.sign_consistent
            if reservoir2_region(float(beta), float(delta)):
                assert analysis.abscissa < 0


def test_reservoir1_closed_form():
    assert reservoir1_analysis(1.0, 0.9).abscissa == pytest.approx(-0.1, abs=1e-12)
    assert reservoir1_analysis(2.0, 1.0).abscissa == pytest.approx(0.0, abs=1e-12)
    check = reservoir1_analysis(1.0, 0.9, A=np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert check.eigensolve_abscissa == pytest.approx(-0.1, abs=1e-10)
    with pytest.raises(ConfigurationError):
        reservoir1_analysis(1.0, 0.9, A=np.array([[0.0, 0.5], [0.5, 0.0]]))
