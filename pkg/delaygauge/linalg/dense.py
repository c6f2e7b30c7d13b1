"""Dense matrix kernels: spectra, matrix exponentials, guarded solves, abs*.

Everything here is a pure function of its inputs. Matrices are plain numpy
arrays; the `Spectrum` model is the only value object.
"""
from __future__ import annotations

import logging
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg as sla
from pydantic import BaseModel, ConfigDict

from delaygauge.core.config import get_settings
from delaygauge.core.errors import (
    ConfigurationError,
    ConvergenceError,
    OverflowFailure,
    SingularMatrixError,
)

LOGGER = logging.getLogger(__name__)


class Spectrum(BaseModel):
    """Eigenvalues of a square matrix with derived radius and abscissa."""

    model_config = ConfigDict(frozen=True)

    eigenvalues: List[complex]
    radius: float
    abscissa: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


def as_matrix(A, name: str = "matrix") -> np.ndarray:
    """Coerce nested sequences to a 2-D array, keeping complex data complex."""

    arr = np.asarray(A)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ConfigurationError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        return arr.astype(complex)
    return arr.astype(float)


def _require_square(A: np.ndarray, name: str = "matrix") -> None:
    if A.shape[0] != A.shape[1]:
        raise ConfigurationError(f"{name} must be square, got shape {A.shape}")


def abs_star(A) -> np.ndarray:
    """Real parts on the diagonal, moduli everywhere else."""

    A = as_matrix(A)
    _require_square(A)
    out = np.abs(A).astype(float)
    np.fill_diagonal(out, np.real(np.diag(A)))
    return out


def spectrum(A) -> Spectrum:
    """Eigenvalues via LAPACK geev (balancing, Hessenberg reduction, shifted QR)."""

    A = as_matrix(A)
    _require_square(A)
    if not np.all(np.isfinite(A)):
        raise ConfigurationError("spectrum requires finite entries")
    if A.shape[0] == 0:
        return Spectrum(eigenvalues=[], radius=0.0, abscissa=float("-inf"))
    try:
        values = sla.eigvals(A, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(
            f"QR iteration did not converge for a {A.shape[0]}x{A.shape[0]} matrix: {exc}"
        ) from exc
    if not np.all(np.isfinite(values)):
        raise ConvergenceError("eigensolver returned non-finite eigenvalues")
    eigenvalues = [complex(v) for v in values]
    return Spectrum(
        eigenvalues=eigenvalues,
        radius=float(np.max(np.abs(values))),
        abscissa=float(np.max(values.real)),
    )


def spectral_radius(A) -> float:
    return spectrum(A).radius


def spectral_abscissa(A) -> float:
    return spectrum(A).abscissa


def expm(A, scale: float = 1.0) -> np.ndarray:
    """Return e^{A * scale} (scaling and squaring with a degree-13 Pade approximant)."""

    A = as_matrix(A)
    _require_square(A)
    scaled = A * scale
    if not np.all(np.isfinite(scaled)):
        raise OverflowFailure("expm input is not finite")
    with np.errstate(over="ignore", invalid="ignore"):
        result = sla.expm(scaled)
    if not np.all(np.isfinite(result)):
        norm = float(np.linalg.norm(scaled, 1))
        raise OverflowFailure(f"expm overflowed for ||A*scale||_1 = {norm:.3e}")
    return result


def solve_linear(A, B) -> np.ndarray:
    """Solve A X = B by pivoted LU, refusing near-singular A."""

    A = as_matrix(A, "A")
    _require_square(A, "A")
    B_arr = np.asarray(B)
    vector_rhs = B_arr.ndim == 1
    B_mat = B_arr.reshape(-1, 1) if vector_rhs else B_arr
    if B_mat.shape[0] != A.shape[0]:
        raise ConfigurationError(f"dimension mismatch: A is {A.shape}, B is {B_arr.shape}")
    settings = get_settings().numerics
    norm = float(np.linalg.norm(A, np.inf))
    threshold = settings.singular_pivot_rtol * norm
    lu, piv = sla.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    weakest = int(np.argmin(pivots)) if pivots.size else 0
    if pivots.size and pivots[weakest] <= threshold:
        raise SingularMatrixError(
            f"matrix is singular to working precision (pivot {pivots[weakest]:.3e} at {weakest}, "
            f"threshold {threshold:.3e})",
            pivot=float(pivots[weakest]),
            index=weakest,
        )
    X = sla.lu_solve((lu, piv), B_mat, check_finite=False)
    residual = float(np.linalg.norm(A @ X - B_mat, np.inf))
    scale = float(np.linalg.norm(B_mat, np.inf))
    if scale > 0 and residual > settings.solve_residual_rtol * scale:
        LOGGER.warning("solve_linear residual %.3e exceeds target for ||B|| = %.3e", residual, scale)
    return X.ravel() if vector_rhs else X


def power_iteration(
    A,
    max_iter: int = 20000,
    tol: float = 1e-13,
    start: Optional[np.ndarray] = None,
) -> float:
    """Spectral radius of a nonnegative matrix from the growth of a positive vector.

    Independent oracle for `spectrum(A).radius`; uses the 1-norm growth ratio,
    which converges to the Perron root for nonnegative A.
    """

    A = as_matrix(A)
    _require_square(A)
    return linear_operator_radius(lambda v: A @ v, A.shape[0], max_iter=max_iter, tol=tol, start=start)


def linear_operator_radius(
    apply,
    dim: int,
    max_iter: int = 20000,
    tol: float = 1e-13,
    start: Optional[np.ndarray] = None,
) -> float:
    """Power iteration for a nonnegative linear map given only through `apply`."""

    x = np.ones(dim) if start is None else np.abs(np.asarray(start, dtype=float))
    x = x / x.sum()
    ratio = 0.0
    for _ in range(max_iter):
        y = np.asarray(apply(x), dtype=float)
        total = float(np.abs(y).sum())
        if total == 0.0:
            return 0.0
        new_ratio = total / float(np.abs(x).sum())
        y = y / total
        if abs(new_ratio - ratio) <= tol * max(1.0, new_ratio) and np.allclose(y, x, atol=tol, rtol=0):
            return new_ratio
        x, ratio = y, new_ratio
    return ratio


def block_companion(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Assemble [[A0 A1 ... A_{n-1}], [I 0 ...], ...] from square blocks."""

    if not blocks:
        raise ConfigurationError("block_companion needs at least one block")
    mats = [as_matrix(block, "block") for block in blocks]
    m = mats[0].shape[0]
    for block in mats:
        if block.shape != (m, m):
            raise ConfigurationError("all companion blocks must share one square shape")
    n = len(mats)
    out = np.zeros((n * m, n * m), dtype=np.result_type(*mats))
    out[:m, :] = np.hstack(mats)
    if n > 1:
        out[m:, : (n - 1) * m] = np.eye((n - 1) * m)
    return out


__all__ = [
    "Spectrum",
    "abs_star",
    "spectrum",
    "spectral_radius",
    "spectral_abscissa",
    "expm",
    "solve_linear",
    "power_iteration",
    "linear_operator_radius",
    "block_companion",
    "as_matrix",
]
