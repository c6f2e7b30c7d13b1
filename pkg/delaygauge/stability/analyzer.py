"""Stability matrix construction and the intrinsic-stability decision.

The stability matrix is abs*(M0) + eps I + sum Mi; a system is intrinsically
stable when its spectral abscissa is negative. Bounds come from the catalog,
from a system file, or (heuristically) from finite-difference sampling.
"""
from __future__ import annotations

import itertools
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from delaygauge.core.config import get_settings
from delaygauge.core.errors import ConfigurationError, OverflowFailure
from delaygauge.linalg.dense import spectral_abscissa
from delaygauge.model.bounds import BoundMatrices, StabilityVerdict
from delaygauge.model.system import SystemSpec

LOGGER = logging.getLogger(__name__)

Box = Sequence[Tuple[float, float]]


def complex_shift(bounds: BoundMatrices) -> float:
    """eps = min(1e-3, margin / 10) with margin the abscissa magnitude at eps = 0."""

    margin = abs(spectral_abscissa(bounds.model_copy(update={"epsilon_shift": 0.0}).stability_matrix()))
    return min(1e-3, margin / 10.0) if margin > 0 else 1e-3


def stability_matrix(bounds: BoundMatrices, complex_valued: bool = False) -> StabilityVerdict:
    """Build the stability matrix and decide alpha < 0."""

    if complex_valued and bounds.epsilon_shift == 0.0:
        bounds = bounds.model_copy(update={"epsilon_shift": complex_shift(bounds)})
    matrix = bounds.stability_matrix()
    abscissa = spectral_abscissa(matrix)
    verdict = StabilityVerdict(
        stability_matrix=matrix,
        abscissa=abscissa,
        intrinsically_stable=abscissa < 0,
        margin=abs(abscissa),
        epsilon_shift=bounds.epsilon_shift,
        heuristic=bounds.heuristic,
        note="heuristic lower estimate of the true suprema" if bounds.heuristic else None,
    )
    LOGGER.info("Stability matrix abscissa %.12g (%s)", abscissa, verdict.label)
    return verdict


def _expand_box(system: SystemSpec, box: Optional[Box]) -> np.ndarray:
    d, r = system.dim, system.delay_count
    if box is None:
        box = [(-2.0, 2.0)] * d
    arr = np.asarray(box, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ConfigurationError("box must be a sequence of (low, high) pairs")
    if arr.shape[0] == d:
        arr = np.tile(arr, (r + 1, 1))
    if arr.shape[0] != d * (r + 1):
        raise ConfigurationError(f"box needs {d} or {d * (r + 1)} intervals, got {arr.shape[0]}")
    if np.any(arr[:, 1] < arr[:, 0]):
        raise ConfigurationError("box intervals must have low <= high")
    return arr


def default_t_grid(system: SystemSpec) -> np.ndarray:
    if system.autonomous:
        return np.array([0.0])
    settings = get_settings().sampling
    return np.linspace(0.0, settings.t_grid_horizon * system.delay_bound, settings.t_grid_points)


def _jacobians(system: SystemSpec, t: float, Z: np.ndarray, steps: np.ndarray) -> np.ndarray:
    """Central differences of f at each row of Z = [x, y_1, ..., y_r]; returns (n, d, d(r+1))."""

    d, r = system.dim, system.delay_count
    n, width = Z.shape
    J = np.empty((n, d, width), dtype=complex if system.complex_valued else float)
    for k in range(width):
        shift = np.zeros(width)
        shift[k] = steps[k]
        plus, minus = Z + shift, Z - shift
        f_plus = system.evaluate_batch(t, plus[:, :d], plus[:, d:].reshape(n, r, d))
        f_minus = system.evaluate_batch(t, minus[:, :d], minus[:, d:].reshape(n, r, d))
        J[:, :, k] = (f_plus - f_minus) / (2.0 * steps[k])
    return J


def _fold(system: SystemSpec, J: np.ndarray, M0: np.ndarray, Mi: List[np.ndarray], Z: np.ndarray, t: float) -> None:
    bad = ~np.all(np.isfinite(J), axis=(1, 2))
    if np.any(bad):
        point = Z[int(np.argmax(bad))]
        raise OverflowFailure(f"non-finite derivative sample at t = {t:.6g}, point {np.array2string(point, precision=6)}")
    d = system.dim
    Dx = J[:, :, :d]
    diag = np.real(np.einsum("nii->ni", Dx)).max(axis=0)
    off = np.abs(Dx).max(axis=0)
    np.fill_diagonal(off, diag)
    np.maximum(M0, off, out=M0)
    for i in range(system.delay_count):
        np.maximum(Mi[i], np.abs(J[:, :, d * (i + 1) : d * (i + 2)]).max(axis=0), out=Mi[i])


def estimate_bounds_by_sampling(
    system: SystemSpec,
    box: Optional[Box] = None,
    density: Optional[int] = None,
    t_grid: Optional[Sequence[float]] = None,
) -> BoundMatrices:
    """Entrywise maxima of abs*(D_x f) and |D_{y_i} f| over a grid on `box`.

    The result is a lower estimate of the true suprema and is flagged heuristic.
    """

    settings = get_settings().sampling
    density = density or settings.grid_density
    if density < 3:
        raise ConfigurationError(f"grid density must be at least 3 per axis, got {density}")
    limits = _expand_box(system, box)
    axes = [np.linspace(lo, hi, density) for lo, hi in limits]
    steps = np.maximum(settings.fd_relative_step * (limits[:, 1] - limits[:, 0]), settings.fd_relative_step)
    times = np.asarray(t_grid if t_grid is not None else default_t_grid(system), dtype=float)
    d, r = system.dim, system.delay_count
    M0 = np.full((d, d), -np.inf)
    Mi = [np.zeros((d, d)) for _ in range(r)]
    total = density ** len(axes)
    LOGGER.info("Sampling %d grid points x %d times for %s", total, times.size, system.name)
    for t in times:
        points = itertools.product(*axes)
        while True:
            batch = np.array(list(itertools.islice(points, settings.batch_size)))
            if batch.size == 0:
                break
            _fold(system, _jacobians(system, float(t), batch, steps), M0, Mi, batch, float(t))
    off = M0 - np.diag(np.diag(M0))
    M0 = np.diag(np.diag(M0)) + np.clip(off, 0.0, None)
    LOGGER.warning("Bounds for %s are a heuristic lower estimate over the sampled box", system.name)
    return BoundMatrices(M0=M0, Mi=Mi, heuristic=True)


def local_stability_matrix(
    system: SystemSpec,
    x_star: Sequence[float],
    t_grid: Optional[Sequence[float]] = None,
) -> StabilityVerdict:
    """Stability matrix from derivatives at (t, x*, ..., x*) only, sup over t_grid."""

    settings = get_settings().sampling
    x_star = np.asarray(x_star, dtype=float)
    d, r = system.dim, system.delay_count
    if x_star.shape != (d,):
        raise ConfigurationError(f"x* must have {d} components, got shape {x_star.shape}")
    times = np.asarray(t_grid if t_grid is not None else default_t_grid(system), dtype=float)
    point = np.tile(x_star, r + 1)[None, :]
    steps = settings.fd_relative_step * np.maximum(1.0, np.abs(point[0]))
    M0 = np.full((d, d), -np.inf)
    Mi = [np.zeros((d, d)) for _ in range(r)]
    for t in times:
        residual = float(np.abs(system.evaluate(float(t), x_star, np.tile(x_star, (r, 1)))).sum())
        if residual > settings.fixed_point_atol:
            raise ConfigurationError(f"x* is not a fixed point: |f(t, x*, ..., x*)| = {residual:.3e} at t = {t:.6g}")
        _fold(system, _jacobians(system, float(t), point, steps), M0, Mi, point, float(t))
    off = M0 - np.diag(np.diag(M0))
    M0 = np.diag(np.diag(M0)) + np.clip(off, 0.0, None)
    return stability_matrix(BoundMatrices(M0=M0, Mi=Mi), complex_valued=system.complex_valued)


def analyze_system(
    system: SystemSpec,
    bounds: Optional[BoundMatrices] = None,
    box: Optional[Box] = None,
    density: Optional[int] = None,
) -> StabilityVerdict:
    """Verdict from declared bounds, falling back to sampled (heuristic) bounds."""

    if bounds is None:
        bounds = estimate_bounds_by_sampling(system, box=box, density=density)
    return stability_matrix(bounds, complex_valued=system.complex_valued)


__all__ = [
    "complex_shift",
    "stability_matrix",
    "estimate_bounds_by_sampling",
    "local_stability_matrix",
    "analyze_system",
    "default_t_grid",
]
