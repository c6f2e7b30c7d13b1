"""Isospectral and isoradial reduction, and the block-companion radius identity.

The reduction of B over the index set S at lambda is
B_SS - B_S,S' (B_S'S' - lambda I)^{-1} B_S'S with S' the complement of S.
Only numeric evaluation at a fixed lambda is supported.
"""
from __future__ import annotations

import logging
import math
from typing import Callable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from delaygauge.core.config import get_settings
from delaygauge.core.errors import ConfigurationError, PoleError, SingularMatrixError
from delaygauge.linalg.dense import as_matrix, block_companion, spectral_radius, spectrum, solve_linear

LOGGER = logging.getLogger(__name__)


def _split(n: int, S: Sequence[int]):
    keep = sorted(set(int(i) for i in S))
    if not keep or len(keep) >= n:
        raise ConfigurationError(f"S must be a nonempty proper subset of 0..{n - 1}, got {list(S)}")
    if keep[0] < 0 or keep[-1] >= n:
        raise ConfigurationError(f"indices of S must lie in 0..{n - 1}, got {list(S)}")
    rest = [i for i in range(n) if i not in set(keep)]
    return keep, rest


def isospectral_reduce(B, S: Sequence[int], lam: complex) -> np.ndarray:
    """Reduction of B over S at lambda; a pole raises PoleError."""

    B = as_matrix(B, "B")
    if B.shape[0] != B.shape[1]:
        raise ConfigurationError(f"B must be square, got shape {B.shape}")
    keep, rest = _split(B.shape[0], S)
    inner = B[np.ix_(rest, rest)] - lam * np.eye(len(rest))
    try:
        correction = solve_linear(inner, B[np.ix_(rest, keep)])
    except SingularMatrixError as exc:
        raise PoleError(f"lambda = {lam} is an eigenvalue of the complement block", lam=lam) from exc
    return B[np.ix_(keep, keep)] - B[np.ix_(keep, rest)] @ correction


class IsoradialReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    exists: bool
    rho: float
    rho_reduced: Optional[float] = None
    preserved: Optional[bool] = None
    reduced: Optional[List[List[float]]] = None
    note: str = ""


def isoradial_reduce(B, S: Sequence[int]) -> IsoradialReport:
    """Reduction at lambda = rho(B); reports nonexistence when rho(B) is a pole."""

    B = as_matrix(B, "B")
    if np.iscomplexobj(B) or np.any(B < 0):
        raise ConfigurationError("isoradial reduction needs an entrywise nonnegative real matrix")
    keep, rest = _split(B.shape[0], S)
    rho = spectral_radius(B)
    inner = spectrum(B[np.ix_(rest, rest)]).eigenvalues
    gap = min(abs(value - rho) for value in inner)
    if gap <= 1e-10 * max(1.0, rho):
        note = f"rho(B) = {rho:.12g} is an eigenvalue of the complement block"
        LOGGER.info("Isoradial reduction does not exist: %s", note)
        return IsoradialReport(exists=False, rho=rho, note=note)
    try:
        reduced = np.real_if_close(isospectral_reduce(B, keep, rho))
    except PoleError as exc:
        return IsoradialReport(exists=False, rho=rho, note=str(exc))
    rho_reduced = spectral_radius(reduced)
    preserved = abs(rho_reduced - rho) <= get_settings().reduction.identity_rtol * max(1.0, rho)
    if not preserved:
        LOGGER.warning("Isoradial reduction moved the radius from %.12g to %.12g", rho, rho_reduced)
    return IsoradialReport(
        exists=True,
        rho=rho,
        rho_reduced=rho_reduced,
        preserved=preserved,
        reduced=np.asarray(reduced, dtype=float).tolist(),
    )


def fixed_point_radius(F: Callable[[float], np.ndarray], hi: float, tol: Optional[float] = None) -> float:
    """The lambda > 0 with lambda = rho(F(lambda)) for entrywise nonincreasing, nonnegative F.

    g(lambda) = rho(F(lambda)) - lambda is strictly decreasing, so the root is
    bracketed by doubling `hi` and halving a lower end, then bisected.
    """

    tol = tol if tol is not None else get_settings().reduction.bisection_tol

    def g(lam: float) -> float:
        with np.errstate(over="ignore", invalid="ignore"):
            mat = F(lam)
        if not np.all(np.isfinite(mat)):
            return math.inf
        return spectral_radius(mat) - lam

    hi = max(hi, tol)
    while g(hi) > 0:
        hi *= 2.0
    lo = hi / 2.0
    while lo > 1e-300 and g(lo) <= 0:
        hi, lo = lo, lo / 2.0
    if lo <= 1e-300:
        return 0.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def delay_sum(blocks: Sequence[np.ndarray]) -> Callable[[float], np.ndarray]:
    """lambda -> sum_i lambda^{-i} A_i."""

    mats = [np.asarray(block, dtype=float) for block in blocks]

    def F(lam: float) -> np.ndarray:
        with np.errstate(over="ignore"):
            weights = np.power(np.float64(lam), -np.arange(len(mats), dtype=float))
        return sum(w * mat for w, mat in zip(weights, mats))

    return F


class CompanionIdentityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    rho_direct: float
    rho_reduced: float
    agree: Optional[bool]
    iff_check: bool
    monotone: bool
    vacuous: bool = False


def companion_radius_identity(blocks: Sequence[np.ndarray], monotone_samples: int = 16) -> CompanionIdentityReport:
    """rho of the assembled companion vs the fixed point lambda = rho(sum lambda^{-i} A_i)."""

    mats = [as_matrix(block, "block") for block in blocks]
    if any(np.any(mat < 0) for mat in mats):
        raise ConfigurationError("companion radius identity needs nonnegative blocks")
    direct = spectral_radius(block_companion(mats))
    total = spectral_radius(sum(mats))
    iff = (direct < 1.0) == (total < 1.0)
    if direct <= get_settings().numerics.sup_atol:
        return CompanionIdentityReport(
            rho_direct=0.0, rho_reduced=0.0, agree=None, iff_check=iff, monotone=True, vacuous=True
        )
    F = delay_sum(mats)
    reduced = fixed_point_radius(F, max(1.0, total))
    agree = abs(direct - reduced) <= get_settings().reduction.identity_rtol * max(1.0, direct)
    grid = np.linspace(max(reduced / 4.0, 1e-6), 4.0 * max(reduced, 1e-6), monotone_samples)
    values = [spectral_radius(F(lam)) - lam for lam in grid]
    monotone = all(b < a for a, b in zip(values[:-1], values[1:]))
    if not agree:
        LOGGER.warning("Companion identity mismatch: direct %.12g, fixed point %.12g", direct, reduced)
    return CompanionIdentityReport(
        rho_direct=direct, rho_reduced=reduced, agree=agree, iff_check=iff, monotone=monotone
    )


__all__ = [
    "isospectral_reduce",
    "IsoradialReport",
    "isoradial_reduce",
    "fixed_point_radius",
    "delay_sum",
    "CompanionIdentityReport",
    "companion_radius_identity",
]
