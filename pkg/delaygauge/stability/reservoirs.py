"""Closed-form stability analysis for the two delayed reservoirs."""
from __future__ import annotations

import logging
import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from delaygauge.core.errors import ConfigurationError, NumericalFailure
from delaygauge.linalg.dense import spectral_abscissa
from delaygauge.model.catalog import check_unit_radius, reservoir2_bounds

LOGGER = logging.getLogger(__name__)


class Reservoir2Analysis(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta: float
    delta: float
    Delta: float
    eigenvalues: List[float]
    abscissa: float
    region_ok: bool
    sign_consistent: bool
    eigensolve_abscissa: float


class Reservoir1Analysis(BaseModel):
    model_config = ConfigDict(frozen=True)

    g: float
    rho: float
    abscissa: float
    eigensolve_abscissa: float


def reservoir2_region(beta: float, delta: float) -> bool:
    """0 < beta < 1/2 and 0 < delta < 1/4 - beta^2."""

    return 0.0 < beta < 0.5 and 0.0 < delta < 0.25 - beta * beta


def reservoir2_analysis(beta: float, delta: float) -> Reservoir2Analysis:
    """Delta = sqrt(1 - 4 delta) and the eigenvalues 1/2 (-1 + beta/Delta +- sqrt(...))."""

    if delta >= 0.25:
        raise ConfigurationError(f"delta = {delta} >= 1/4 makes Delta = sqrt(1 - 4 delta) complex")
    if delta <= 0:
        raise ConfigurationError(f"delta must be positive, got {delta}")
    Delta = math.sqrt(1.0 - 4.0 * delta)
    ratio = beta / Delta
    disc = ratio * ratio - 2.0 * beta * Delta + Delta * Delta
    root = math.sqrt(max(disc, 0.0))
    eigenvalues = [0.5 * (-1.0 + ratio + root), 0.5 * (-1.0 + ratio - root)]
    abscissa = eigenvalues[0]
    inside = 2.0 * beta < Delta < 1.0
    scale = max(1.0, abs(beta))
    sign_consistent = (abscissa < 0) == inside or abs(abscissa) <= 1e-12 * scale
    eig_abscissa = spectral_abscissa(reservoir2_bounds(beta, delta).stability_matrix())
    if abs(eig_abscissa - abscissa) > 1e-9 * scale:
        raise NumericalFailure(f"closed-form abscissa {abscissa:.15g} disagrees with eigensolve {eig_abscissa:.15g}")
    return Reservoir2Analysis(
        beta=beta,
        delta=delta,
        Delta=Delta,
        eigenvalues=eigenvalues,
        abscissa=abscissa,
        region_ok=reservoir2_region(beta, delta),
        sign_consistent=sign_consistent,
        eigensolve_abscissa=eig_abscissa,
    )


def reservoir1_analysis(g: float, rho: float, A: Optional[np.ndarray] = None) -> Reservoir1Analysis:
    """alpha = g (rho - 1), checked against an eigensolve of g (rho A - I)."""

    if g <= 0 or rho <= 0:
        raise ConfigurationError(f"g and rho must be positive, got g={g}, rho={rho}")
    A = np.array([[0.0, 1.0], [1.0, 0.0]]) if A is None else np.asarray(A, dtype=float)
    if np.any(A < 0):
        raise ConfigurationError("reservoir matrix A must be entrywise nonnegative")
    check_unit_radius(A)
    abscissa = g * (rho - 1.0)
    eig_abscissa = spectral_abscissa(g * (rho * A - np.eye(A.shape[0])))
    if abs(eig_abscissa - abscissa) > 1e-10 * max(1.0, g):
        raise NumericalFailure(f"closed-form abscissa {abscissa:.15g} disagrees with eigensolve {eig_abscissa:.15g}")
    return Reservoir1Analysis(g=g, rho=rho, abscissa=abscissa, eigensolve_abscissa=eig_abscissa)


__all__ = [
    "Reservoir2Analysis",
    "Reservoir1Analysis",
    "reservoir2_region",
    "reservoir2_analysis",
    "reservoir1_analysis",
]
