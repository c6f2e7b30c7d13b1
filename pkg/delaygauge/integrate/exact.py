"""Closed-form stepping of the linear comparison system under LI_tau delays.

Between lattice points an LI_tau delay freezes every delayed argument on
the lattice, so variation of parameters gives
x((k+1) tau) = e^{M0 tau} x(k tau) + M0^{-1}(e^{M0 tau} - I) sum_i Mi x((k - n_{i,k}) tau).
"""
from __future__ import annotations

from typing import Tuple

import numpy as np

from delaygauge.core.errors import ConfigurationError
from delaygauge.linalg.dense import expm, solve_linear
from delaygauge.model.bounds import BoundMatrices
from delaygauge.model.delays import LiTauDelay


def interval_operators(bounds: BoundMatrices, tau: float) -> Tuple[np.ndarray, np.ndarray]:
    """(e^{M0 tau}, M0^{-1}(e^{M0 tau} - I)); singular M0 raises SingularMatrixError."""

    M0 = bounds.shifted_M0
    E = expm(M0, tau)
    P = solve_linear(M0, E - np.eye(bounds.dim))
    return E, P


def as_grid(phi_grid, n_tau: int, dim: int) -> np.ndarray:
    """Reshape a stacked (phi(0), phi(-tau), ..., phi(-n_tau tau)) vector to rows."""

    arr = np.asarray(phi_grid, dtype=float)
    if arr.size != (n_tau + 1) * dim:
        raise ConfigurationError(f"grid vector needs {(n_tau + 1) * dim} entries, got {arr.size}")
    return arr.reshape(n_tau + 1, dim)


def exact_step_linear(bounds: BoundMatrices, li: LiTauDelay, phi_grid, steps: int, first_interval: int = 0) -> np.ndarray:
    """Advance the lattice vector `steps` tau-steps; returns (steps + 1, (n_tau + 1) d) stacked vectors."""

    if li.width != bounds.delay_count:
        raise ConfigurationError(f"LI_tau delay has {li.width} components, bounds have {bounds.delay_count}")
    if first_interval + steps > li.intervals:
        raise ConfigurationError(
            f"LI_tau table covers {li.intervals} intervals, asked for {first_interval + steps}"
        )
    d, n_tau = bounds.dim, li.n_tau
    E, P = interval_operators(bounds, li.tau)
    coupling = [P @ block for block in bounds.Mi]
    grid = as_grid(phi_grid, n_tau, d)
    out = np.empty((steps + 1, (n_tau + 1) * d))
    out[0] = grid.ravel()
    for k in range(steps):
        new = E @ grid[0]
        for i, m in enumerate(li.indices(first_interval + k)):
            new = new + coupling[i] @ grid[m]
        grid = np.vstack([new[None, :], grid[:-1]])
        out[k + 1] = grid.ravel()
    return out


__all__ = ["interval_operators", "as_grid", "exact_step_linear"]
