"""Catalog of concrete delay systems with analytic bound matrices.

Entries:
- ``nis-example``: x' = Ax + sin(B x(t-h)), A = -I, B = [[-5/4, 1/4], [1/4, -5/4]]
- ``is-example``: same form with A = [[-4, 0], [-1, -1]], B = [[-1, 1], [1, 0]]
- ``linear``: x' = M0 x + sum Mi x(t - h_i)
- ``reservoir2``: two-dimensional sin^2 reservoir driven by J(t); bounds are
  given in the coordinates that diagonalise its linear part
- ``reservoir1``: x' = -g (x + tanh(rho A x(t-h) + sigma W u(t)))
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from delaygauge.core.errors import ConfigurationError
from delaygauge.linalg.dense import abs_star, spectral_radius
from delaygauge.model.bounds import BoundMatrices
from delaygauge.model.system import SystemSpec

LOGGER = logging.getLogger(__name__)

FractionMatrix = List[List[Fraction]]

_F = Fraction
NIS_A: FractionMatrix = [[_F(-1), _F(0)], [_F(0), _F(-1)]]
NIS_B: FractionMatrix = [[_F(-5, 4), _F(1, 4)], [_F(1, 4), _F(-5, 4)]]
IS_A: FractionMatrix = [[_F(-4), _F(0)], [_F(-1), _F(-1)]]
IS_B: FractionMatrix = [[_F(-1), _F(1)], [_F(1), _F(0)]]

DEFAULT_T = 3.0
RESERVOIR2_TAUS = (0.4, 0.7, 1.0)


class CatalogEntry(BaseModel):
    """A catalog system together with its analytic bounds and Lipschitz constant."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    system: SystemSpec
    bounds: BoundMatrices
    lipschitz: float
    exact_M0: Optional[FractionMatrix] = None
    exact_Mi: Optional[List[FractionMatrix]] = None

    def exact_stability_matrix(self) -> Optional[FractionMatrix]:
        """Sum of the bound matrices in rational arithmetic, when the entry is rational."""

        if self.exact_M0 is None:
            return None
        total = [row[:] for row in self.exact_M0]
        for block in self.exact_Mi or []:
            total = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(total, block)]
        return total


def _to_array(matrix: FractionMatrix) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in matrix])


def _abs_star_exact(matrix: FractionMatrix) -> FractionMatrix:
    return [[v if i == j else abs(v) for j, v in enumerate(row)] for i, row in enumerate(matrix)]


def _abs_exact(matrix: FractionMatrix) -> FractionMatrix:
    return [[abs(v) for v in row] for row in matrix]


def _norm1(matrix: np.ndarray) -> float:
    return float(np.abs(matrix).sum(axis=0).max())


def _sine_example(name: str, A_exact: FractionMatrix, B_exact: FractionMatrix, T: float) -> CatalogEntry:
    if T <= 0:
        raise ConfigurationError(f"{name}: delay bound T must be positive, got {T}")
    A, B = _to_array(A_exact), _to_array(B_exact)

    def rhs(t, x, ys):
        return x @ A.T + np.sin(ys[..., 0, :] @ B.T)

    lipschitz = max(_norm1(A), _norm1(B))
    system = SystemSpec(name=name, dim=2, delay_count=1, delay_bound=T, rhs=rhs, vectorized=True, lipschitz=lipschitz)
    M0_exact, M1_exact = _abs_star_exact(A_exact), _abs_exact(B_exact)
    bounds = BoundMatrices(M0=_to_array(M0_exact), Mi=[_to_array(M1_exact)])
    return CatalogEntry(
        name=name,
        parameters={"T": T},
        system=system,
        bounds=bounds,
        lipschitz=lipschitz,
        exact_M0=M0_exact,
        exact_Mi=[M1_exact],
    )


def nis_example(T: float = DEFAULT_T) -> CatalogEntry:
    return _sine_example("nis-example", NIS_A, NIS_B, T)


def is_example(T: float = DEFAULT_T) -> CatalogEntry:
    return _sine_example("is-example", IS_A, IS_B, T)


def linear_entry(M0, Mi: Sequence = (), T: float = 1.0) -> CatalogEntry:
    """x' = M0 x + sum Mi x(t - h_i); complex M0 or Mi mark the system complex-valued."""

    M0_arr = np.asarray(M0)
    Mi_arr = [np.asarray(block) for block in Mi]
    if M0_arr.ndim != 2 or M0_arr.shape[0] != M0_arr.shape[1]:
        raise ConfigurationError(f"linear: M0 must be square, got shape {M0_arr.shape}")
    if T <= 0:
        raise ConfigurationError(f"linear: delay bound T must be positive, got {T}")
    complex_valued = np.iscomplexobj(M0_arr) or any(np.iscomplexobj(b) for b in Mi_arr)
    dtype = complex if complex_valued else float
    A = M0_arr.astype(dtype)
    blocks = np.stack([b.astype(dtype) for b in Mi_arr]) if Mi_arr else np.zeros((0,) + A.shape, dtype=dtype)

    def rhs(t, x, ys):
        out = x @ A.T
        if blocks.shape[0]:
            out = out + np.einsum("ijk,...ik->...j", blocks, ys)
        return out

    lipschitz = max([_norm1(A)] + [_norm1(b) for b in blocks])
    system = SystemSpec(
        name="linear",
        dim=A.shape[0],
        delay_count=len(Mi_arr),
        delay_bound=T,
        rhs=rhs,
        vectorized=True,
        complex_valued=complex_valued,
        lipschitz=lipschitz,
    )
    bounds = BoundMatrices(M0=abs_star(A), Mi=[np.abs(b) for b in blocks])
    return CatalogEntry(
        name="linear",
        parameters={"T": T, "M0": A.tolist(), "Mi": [b.tolist() for b in blocks]},
        system=system,
        bounds=bounds,
        lipschitz=lipschitz,
    )


def reservoir2_bounds(beta: float, delta: float, count: int = 1) -> BoundMatrices:
    """Bounds in z = S^{-1} x, where S diagonalises [[-1, -delta], [1, 0]]."""

    if not 0 < delta < 0.25:
        raise ConfigurationError(f"reservoir2: delta must lie in (0, 1/4), got {delta}")
    Delta = math.sqrt(1.0 - 4.0 * delta)
    M0 = np.diag([(-1.0 - Delta) / 2.0, (-1.0 + Delta) / 2.0])
    block = beta / (2.0 * count * Delta) * np.array([[1.0 + Delta, 1.0 - Delta], [1.0 + Delta, 1.0 - Delta]])
    return BoundMatrices(M0=M0, Mi=[block] * count, coordinates="transformed")


def reservoir2_system(
    beta: float = 1.0 / 3.0,
    delta: float = 0.125,
    phase: float = 1.0,
    gain: float = 7.0,
    taus: Sequence[float] = RESERVOIR2_TAUS,
    J: Optional[Callable[[float], float]] = None,
    T: Optional[float] = None,
) -> SystemSpec:
    """x1' = -x1 - delta x2 + beta/M sum sin^2(x1(t - tau_i) + phase + gain J(t)), x2' = x1.

    Any delta > 0 is accepted here; bounds exist only for delta in (0, 1/4).
    """

    if beta <= 0:
        raise ConfigurationError(f"reservoir2: beta must be positive, got {beta}")
    if delta <= 0:
        raise ConfigurationError(f"reservoir2: delta must be positive, got {delta}")
    taus = [float(v) for v in taus]
    if not taus or min(taus) < 0:
        raise ConfigurationError("reservoir2: need at least one nonnegative delay")
    count = len(taus)
    bound = float(T) if T is not None else max(max(taus), 1e-12)
    drive = J if J is not None else (lambda t: 0.0)

    def rhs(t, x, ys):
        shift = phase + gain * float(drive(t))
        forcing = (np.sin(ys[..., :, 0] + shift) ** 2).sum(axis=-1) * (beta / count)
        return np.stack([-x[..., 0] - delta * x[..., 1] + forcing, x[..., 0]], axis=-1)

    return SystemSpec(
        name="reservoir2",
        dim=2,
        delay_count=count,
        delay_bound=bound,
        rhs=rhs,
        vectorized=True,
        autonomous=J is None,
        lipschitz=max(_norm1(np.array([[-1.0, -delta], [1.0, 0.0]])), beta / count),
    )


def reservoir2_entry(
    beta: float = 1.0 / 3.0,
    delta: float = 0.125,
    phase: float = 1.0,
    gain: float = 7.0,
    taus: Sequence[float] = RESERVOIR2_TAUS,
    J: Optional[Callable[[float], float]] = None,
    T: Optional[float] = None,
) -> CatalogEntry:
    system = reservoir2_system(beta=beta, delta=delta, phase=phase, gain=gain, taus=taus, J=J, T=T)
    return CatalogEntry(
        name="reservoir2",
        parameters={
            "beta": beta,
            "delta": delta,
            "phase": phase,
            "gain": gain,
            "taus": [float(v) for v in taus],
            "T": system.delay_bound,
        },
        system=system,
        bounds=reservoir2_bounds(beta, delta, system.delay_count),
        lipschitz=system.lipschitz,
    )


def check_unit_radius(A: np.ndarray, atol: float = 1e-8) -> None:
    radius = spectral_radius(A)
    if abs(radius - 1.0) > atol:
        raise ConfigurationError(f"reservoir matrix must have spectral radius 1 (got {radius:.12g}); rescale A")


def reservoir1_entry(
    g: float = 1.0,
    rho: float = 0.9,
    A=None,
    W=None,
    sigma_in: float = 1.0,
    u: Optional[Callable[[float], np.ndarray]] = None,
    T: float = 1.0,
) -> CatalogEntry:
    """x' = -g (x + tanh(rho A x(t-h) + sigma W u(t))) with rho(A) = 1 and W injective."""

    if g <= 0 or rho <= 0:
        raise ConfigurationError(f"reservoir1: g and rho must be positive, got g={g}, rho={rho}")
    A_arr = np.array([[0.0, 1.0], [1.0, 0.0]]) if A is None else np.asarray(A, dtype=float)
    n = A_arr.shape[0]
    if A_arr.ndim != 2 or A_arr.shape != (n, n):
        raise ConfigurationError(f"reservoir1: A must be square, got shape {A_arr.shape}")
    if np.any(A_arr < 0):
        raise ConfigurationError("reservoir1: A must be entrywise nonnegative")
    check_unit_radius(A_arr)
    W_arr = np.eye(n) if W is None else np.asarray(W, dtype=float).reshape(n, -1)
    if np.linalg.matrix_rank(W_arr) < W_arr.shape[1]:
        raise ConfigurationError("reservoir1: W must have full column rank")
    drive = u if u is not None else (lambda t: np.zeros(W_arr.shape[1]))

    def rhs(t, x, ys):
        inp = sigma_in * (W_arr @ np.atleast_1d(np.asarray(drive(t), dtype=float)))
        return -g * (x + np.tanh(rho * (ys[..., 0, :] @ A_arr.T) + inp))

    lipschitz = g * max(1.0, rho * _norm1(A_arr))
    system = SystemSpec(
        name="reservoir1",
        dim=n,
        delay_count=1,
        delay_bound=T,
        rhs=rhs,
        vectorized=True,
        autonomous=u is None,
        lipschitz=lipschitz,
    )
    bounds = BoundMatrices(M0=-g * np.eye(n), Mi=[g * rho * np.abs(A_arr)])
    return CatalogEntry(
        name="reservoir1",
        parameters={"g": g, "rho": rho, "A": A_arr.tolist(), "sigma_in": sigma_in, "T": T},
        system=system,
        bounds=bounds,
        lipschitz=lipschitz,
    )


_BUILDERS: Dict[str, Callable[..., CatalogEntry]] = {
    "nis-example": nis_example,
    "is-example": is_example,
    "linear": linear_entry,
    "reservoir2": reservoir2_entry,
    "reservoir1": reservoir1_entry,
}


def catalog_names() -> List[str]:
    return sorted(_BUILDERS)


def catalog(name: str, params: Optional[Dict[str, Any]] = None, **kwargs: Any) -> CatalogEntry:
    """Build a catalog entry by name."""

    builder = _BUILDERS.get(name)
    if builder is None:
        raise ConfigurationError(f"unknown catalog system '{name}' (known: {', '.join(catalog_names())})")
    merged = {**(params or {}), **kwargs}
    try:
        entry = builder(**merged)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for '{name}': {exc}") from exc
    LOGGER.debug("Built catalog entry %s with %s", name, sorted(merged))
    return entry


__all__ = [
    "CatalogEntry",
    "catalog",
    "catalog_names",
    "nis_example",
    "is_example",
    "linear_entry",
    "reservoir2_system",
    "reservoir2_entry",
    "reservoir2_bounds",
    "reservoir1_entry",
    "check_unit_radius",
]
