import math

import numpy as np
import pytest

from delaygauge.core.errors import ConfigurationError, ConvergenceError, OverflowFailure, SingularMatrixError
from delaygauge.linalg.dense import (
    abs_star,
    block_companion,
    expm,
    power_iteration,
    solve_linear,
    spectral_abscissa,
    spectral_radius,
    spectrum,
)


def test_abs_star_real_and_complex():
    assert np.array_equal(abs_star([[-1, -2], [3, -4]]), np.array([[-1.0, 2.0], [3.0, 4.0]]))
    out = abs_star(np.array([[-1 + 2j, -1j], [1, 2 - 1j]]))
    assert out.dtype == float
    assert np.allclose(out, [[-1.0, 1.0], [1.0, 2.0]])
    assert np.array_equal(abs_star(np.eye(3)), np.eye(3))


def test_abs_star_idempotent_and_rejects_rectangular():
    A = np.array([[-2.0, 0.5], [1.0, -3.0]])
    assert np.array_equal(abs_star(abs_star(A)), abs_star(A))
    with pytest.raises(ConfigurationError):
        abs_star(np.ones((2, 3)))


def test_spectrum_examples():
    nilpotent = spectrum([[0.0, 2.0], [0.0, 0.0]])
    assert nilpotent.radius == 0.0
    assert nilpotent.dim == 2

    stable = spectrum([[-3.0, 1.0], [2.0, -1.0]])
    assert stable.abscissa == pytest.approx(-2.0 + math.sqrt(3.0), abs=1e-12)
    assert sorted(v.real for v in stable.eigenvalues) == pytest.approx(
        [-2.0 - math.sqrt(3.0), -2.0 + math.sqrt(3.0)], abs=1e-12
    )

    unstable = spectrum([[0.25, 0.25], [0.25, 0.25]])
    assert unstable.abscissa == pytest.approx(0.5, abs=1e-12)
    assert sorted(v.real for v in unstable.eigenvalues) == pytest.approx([0.0, 0.5], abs=1e-12)


def test_spectrum_derived_quantities_match_eigenvalues():
    rng = np.random.default_rng(0)
    for _ in range(20):
        A = rng.normal(size=(5, 5))
        sigma = spectrum(A)
        values = np.asarray(sigma.eigenvalues)
        assert sigma.radius == float(np.max(np.abs(values)))
        assert sigma.abscissa == float(np.max(values.real))


def test_spectrum_rejects_non_finite():
    with pytest.raises(ConfigurationError):
        spectrum([[np.nan, 0.0], [0.0, 1.0]])


def test_expm_examples():
    assert np.allclose(expm(np.zeros((3, 3)), 5.0), np.eye(3))
    assert np.allclose(expm(np.diag([1.0, -2.0])), np.diag([math.e, math.exp(-2.0)]), rtol=1e-12)
    assert np.allclose(expm([[0.0, 1.0], [0.0, 0.0]]), [[1.0, 1.0], [0.0, 1.0]], atol=1e-14)


def test_expm_semigroup():
    rng = np.random.default_rng(1)
    for _ in range(10):
        A = rng.normal(size=(4, 4))
        A *= 2.0 / np.linalg.norm(A, 2)
        s, t = rng.uniform(0.1, 1.0, size=2)
        lhs = expm(A, s + t)
        rhs = expm(A, s) @ expm(A, t)
        assert np.linalg.norm(lhs - rhs) <= 1e-9 * np.linalg.norm(lhs)


def test_expm_overflow():
    with pytest.raises(OverflowFailure):
        expm(np.array([[1000.0]]), 10.0)


def test_solve_linear():
    B = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(solve_linear(np.eye(2), B), B)
    assert np.allclose(solve_linear(np.diag([2.0, 4.0]), np.eye(2)), np.diag([0.5, 0.25]))
    x = solve_linear(np.diag([2.0, 4.0]), np.array([1.0, 1.0]))
    assert x.shape == (2,)


def test_solve_linear_singular():
    with pytest.raises(SingularMatrixError) as info:
        solve_linear(np.array([[-1.0, 1.0], [1.0, -1.0]]), np.eye(2))
    assert info.value.pivot <= 1e-12


def test_power_iteration_agrees_with_eigensolve():
    rng = np.random.default_rng(2)
    for _ in range(20):
        A = rng.uniform(0.05, 1.0, size=(6, 6))
        assert power_iteration(A) == pytest.approx(spectral_radius(A), rel=1e-8)


def test_block_companion_layout():
    A0 = np.array([[1.0, 2.0], [3.0, 4.0]])
    A1 = np.array([[5.0, 6.0], [7.0, 8.0]])
    C = block_companion([A0, A1])
    assert C.shape == (4, 4)
    assert np.array_equal(C[:2, :2], A0)
    assert np.array_equal(C[:2, 2:], A1)
    assert np.array_equal(C[2:, :2], np.eye(2))
    assert np.array_equal(C[2:, 2:], np.zeros((2, 2)))


def test_abscissa_scales_linearly():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(4, 4))
    assert spectral_abscissa(3.0 * A) == pytest.approx(3.0 * spectral_abscissa(A), rel=1e-10)


def test_stuck_eigensolve_reports_lapack_message(monkeypatch):
    def stuck(*args, **kwargs):
        raise np.linalg.LinAlgError("geev failed")

    monkeypatch.setattr("delaygauge.linalg.dense.sla.eigvals", stuck)
    with pytest.raises(ConvergenceError) as info:
        spectrum([[1.0, 2.0], [3.0, 4.0]])
    assert "2x2" in str(info.value)
    assert "geev failed" in str(info.value)
