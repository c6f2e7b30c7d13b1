"""Block-companion matrices of the linear comparison flow over one tau-step.

For an LI_tau delay with anchors (n_1, ..., n_r) on an interval, the lattice
vector (x(0), x(-tau), ..., x(-n_tau tau)) advances by the matrix whose top
block row is [e^{M0 tau} + N_0, N_1, ..., N_{n_tau}] with
N_m = M0^{-1}(e^{M0 tau} - I) * sum_{n_i = m} M_i, and whose subdiagonal
blocks are identities.
"""
from __future__ import annotations

import itertools
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, field_serializer

from delaygauge.core.errors import ConfigurationError
from delaygauge.integrate.exact import exact_step_linear, interval_operators
from delaygauge.integrate.solver import integrate, window
from delaygauge.linalg.dense import block_companion, linear_operator_radius, spectral_radius
from delaygauge.model.bounds import BoundMatrices
from delaygauge.model.delays import LiTauDelay
from delaygauge.model.history import AnyHistory, SinusoidHistory

LOGGER = logging.getLogger(__name__)


class BlockCompanion(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    tau: float
    n_tau: int
    indices: List[int]
    top: List[np.ndarray]

    @field_serializer("top")
    def _dump_top(self, value: List[np.ndarray]):
        return [block.tolist() for block in value]

    @property
    def d(self) -> int:
        return self.top[0].shape[0]

    @property
    def size(self) -> int:
        return (self.n_tau + 1) * self.d

    @property
    def matrix(self) -> np.ndarray:
        return block_companion(self.top)

    @property
    def nonnegative(self) -> bool:
        return all(bool(np.all(block >= 0)) for block in self.top)

    def radius(self) -> float:
        return spectral_radius(self.matrix)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        """Companion action without assembling the dense matrix."""

        grid = np.asarray(vector).reshape(self.n_tau + 1, self.d)
        head = sum(block @ grid[m] for m, block in enumerate(self.top))
        return np.concatenate([head, grid[:-1].ravel()])


def _assemble(
    bounds: BoundMatrices, tau: float, n_tau: int, indices: Sequence[int], operators: Tuple[np.ndarray, np.ndarray]
) -> BlockCompanion:
    if len(indices) != bounds.delay_count:
        raise ConfigurationError(f"need {bounds.delay_count} anchor indices, got {len(indices)}")
    bad = [n for n in indices if n < 0 or n > n_tau]
    if bad:
        raise ConfigurationError(f"anchor indices must lie in 0..{n_tau}, got {bad}")
    E, P = operators
    d = bounds.dim
    top = [np.zeros((d, d)) for _ in range(n_tau + 1)]
    top[0] = top[0] + E
    for n, block in zip(indices, bounds.Mi):
        top[n] = top[n] + P @ block
    return BlockCompanion(tau=tau, n_tau=n_tau, indices=list(indices), top=top)


def build_companion(
    bounds: BoundMatrices,
    li: Union[LiTauDelay, float],
    indices: Optional[Sequence[int]] = None,
    interval: int = 0,
    n_tau: Optional[int] = None,
) -> BlockCompanion:
    """Companion for explicit anchor `indices`, or for interval `interval` of an LI_tau table.

    `li` may also be a bare tau, in which case `n_tau` and `indices` are required.
    """

    if isinstance(li, LiTauDelay):
        tau, n_tau = li.tau, li.n_tau
        if indices is None:
            indices = li.indices(interval)
    else:
        tau = float(li)
        if n_tau is None or indices is None:
            raise ConfigurationError("a bare tau needs n_tau and indices")
    return _assemble(bounds, tau, n_tau, indices, interval_operators(bounds, tau))


def companion_family(bounds: BoundMatrices, tau: float, n_tau: int) -> List[BlockCompanion]:
    """Every member of the family: one companion per anchor tuple in {0..n_tau}^r."""

    operators = interval_operators(bounds, tau)
    choices = itertools.product(range(n_tau + 1), repeat=bounds.delay_count)
    return [_assemble(bounds, tau, n_tau, combo, operators) for combo in choices]


class FamilyRadiusReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    tau: float
    n_tau: int
    members: int
    max_radius: float
    argmax: List[int]
    at_least_one: List[List[int]]


def family_radius_report(bounds: BoundMatrices, tau: float, n_tau: int) -> FamilyRadiusReport:
    """Spectral radii of all family members; members with radius >= 1 are listed."""

    family = companion_family(bounds, tau, n_tau)
    radii = [member.radius() for member in family]
    worst = int(np.argmax(radii))
    loud = [member.indices for member, rho in zip(family, radii) if rho >= 1.0]
    if loud:
        LOGGER.warning("%d of %d companion matrices have spectral radius >= 1", len(loud), len(family))
    return FamilyRadiusReport(
        tau=tau,
        n_tau=n_tau,
        members=len(family),
        max_radius=radii[worst],
        argmax=family[worst].indices,
        at_least_one=loud,
    )


def evaluation_map(phi: AnyHistory, tau: float, n_tau: int) -> np.ndarray:
    """Stacked lattice samples (phi(0), phi(-tau), ..., phi(-n_tau tau))."""

    depth = n_tau * tau
    span = getattr(phi, "span", None)
    if span is not None and depth > span * (1.0 + 1e-12) + 1e-12:
        raise ConfigurationError(f"history covers [-{span:.6g}, 0], lattice reaches -{depth:.6g}")
    points = -tau * np.arange(n_tau + 1)
    return np.asarray(phi.values(points)).ravel()


class SemiconjugacyReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool
    steps: int
    discrepancy: float
    threshold: float


def verify_semiconjugacy(bounds: BoundMatrices, li: LiTauDelay, phi, steps: int) -> SemiconjugacyReport:
    """Closed-form lattice evolution against repeated companion multiplication."""

    if isinstance(phi, (np.ndarray, list, tuple)):
        start = np.asarray(phi, dtype=float).ravel()
    else:
        start = evaluation_map(phi, li.tau, li.n_tau)
    exact = exact_step_linear(bounds, li, start, steps)
    operators = interval_operators(bounds, li.tau)
    vector = start.copy()
    worst = 0.0
    for k in range(steps):
        member = _assemble(bounds, li.tau, li.n_tau, li.indices(k), operators)
        vector = member.matrix @ vector
        worst = max(worst, float(np.abs(vector - exact[k + 1]).max()))
    threshold = 1e-10 * float(np.abs(start).sum())
    LOGGER.debug("Semiconjugacy over %d steps: discrepancy %.3e (threshold %.3e)", steps, worst, threshold)
    return SemiconjugacyReport(passed=worst <= threshold, steps=steps, discrepancy=worst, threshold=threshold)


class KernelReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool
    steps: int
    max_lattice_value: float


def lattice_bump(tau: float, dim: int, height: float = 1.0, span: Optional[float] = None) -> SinusoidHistory:
    """height * sin(pi s / tau) in every component: zero on the lattice, nonzero between."""

    return SinusoidHistory(
        offset=[0.0] * dim,
        amplitude=[height] * dim,
        frequency=[np.pi / tau] * dim,
        span=span,
    )


def kernel_check(
    bounds: BoundMatrices,
    li: LiTauDelay,
    phi: Optional[AnyHistory] = None,
    steps: Optional[int] = None,
    substeps: int = 20,
    tol: float = 1e-10,
) -> KernelReport:
    """Integrate the LI_tau linear system from a history vanishing on the lattice.

    After `steps` tau-steps (default n_tau) the solution must vanish on every
    lattice point of the final window.
    """

    steps = steps or li.n_tau
    if steps > li.intervals:
        raise ConfigurationError(f"LI_tau table covers {li.intervals} intervals, asked for {steps}")
    phi = phi or lattice_bump(li.tau, bounds.dim, span=li.T_prime)
    lattice_start = evaluation_map(phi, li.tau, li.n_tau)
    if np.abs(lattice_start).max() > tol:
        raise ConfigurationError("kernel check needs a history that vanishes on the lattice")
    t_end = steps * li.tau
    traj = integrate(bounds, li, phi, t_end, step=li.tau / substeps, delay_bound=li.T_prime)
    times = li.tau * np.arange(steps + 1)
    visited = float(np.abs(traj.evaluate(times)).max())
    final = float(np.abs(evaluation_map(window(traj, t_end), li.tau, li.n_tau)).max())
    worst = max(visited, final)
    return KernelReport(passed=worst <= tol, steps=steps, max_lattice_value=worst)


class ProductRadiusRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    first_interval: int
    length: int
    rho_direct: float
    rho_power: float
    relative_error: float


class ProductRadiusReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool
    rows: List[ProductRadiusRow]


def product_radius_check(
    bounds: BoundMatrices,
    li: LiTauDelay,
    max_length: int = 3,
    first_intervals: Optional[Sequence[int]] = None,
    rtol: float = 1e-6,
) -> ProductRadiusReport:
    """rho of companion products vs power iteration of the composed closed-form step map."""

    operators = interval_operators(bounds, li.tau)
    firsts = list(first_intervals) if first_intervals is not None else [0]
    size = (li.n_tau + 1) * bounds.dim
    rows: List[ProductRadiusRow] = []
    for first in firsts:
        for length in range(1, max_length + 1):
            if first + length > li.intervals:
                break
            product = np.eye(size)
            for k in range(first, first + length):
                product = _assemble(bounds, li.tau, li.n_tau, li.indices(k), operators).matrix @ product
            direct = spectral_radius(product)

            def composed(v, first=first, length=length):
                return exact_step_linear(bounds, li, v, length, first_interval=first)[-1]

            power = linear_operator_radius(composed, size)
            error = abs(direct - power) / max(direct, 1e-300)
            rows.append(
                ProductRadiusRow(
                    first_interval=first, length=length, rho_direct=direct, rho_power=power, relative_error=error
                )
            )
    passed = all(row.relative_error <= rtol for row in rows)
    return ProductRadiusReport(passed=passed, rows=rows)


def companion_to_csv(companion: BlockCompanion, path: Union[str, Path]) -> Path:
    path = Path(path)
    pd.DataFrame(companion.matrix).to_csv(path, header=False, index=False, float_format="%.17g", lineterminator="\n")
    return path


def table_frame(li: LiTauDelay) -> pd.DataFrame:
    """Anchor table as rows k, n1, ..., nr."""

    frame = pd.DataFrame({"k": np.arange(li.intervals)})
    for i, row in enumerate(li.table):
        frame[f"n{i + 1}"] = row
    return frame


__all__ = [
    "BlockCompanion",
    "build_companion",
    "companion_family",
    "FamilyRadiusReport",
    "family_radius_report",
    "evaluation_map",
    "SemiconjugacyReport",
    "verify_semiconjugacy",
    "KernelReport",
    "lattice_bump",
    "kernel_check",
    "ProductRadiusRow",
    "ProductRadiusReport",
    "product_radius_check",
    "companion_to_csv",
    "table_frame",
]
