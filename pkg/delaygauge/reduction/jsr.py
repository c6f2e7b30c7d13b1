"""Joint spectral radius bounds for block-companion families.

Each row j of the top block row of a row-independent-closure element picks its
own anchor n_{i,j} per delay. Its radius solves
lambda = rho(E + sum_i diag(lambda^{-n_{i,.}}) B_i) with B_i = M0^{-1}(e^{M0 tau} - I) M_i,
so every element costs a d x d bisection instead of an eigensolve of size
(n_tau + 1) d.
"""
from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from delaygauge.core.config import get_settings
from delaygauge.core.errors import ConfigurationError
from delaygauge.core.logging import timed
from delaygauge.integrate.exact import interval_operators
from delaygauge.linalg.dense import as_matrix, spectral_radius, spectrum
from delaygauge.model.bounds import BoundMatrices
from delaygauge.reduction.isospectral import fixed_point_radius

LOGGER = logging.getLogger(__name__)

_CHUNK = 512


class RicResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    sup_rho: float
    argmax: List[List[int]]
    exact: bool
    evaluated: int
    total: int
    coverage: float
    skipped: int = 0


def ric_operators(bounds: BoundMatrices, tau: float) -> Tuple[np.ndarray, List[np.ndarray]]:
    E, P = interval_operators(bounds, tau)
    return E, [P @ block for block in bounds.Mi]


def ric_radius(E: np.ndarray, couplings: Sequence[np.ndarray], assignment: np.ndarray) -> float:
    """Radius of the element with anchors assignment[i, j] (delay i, row j)."""

    assignment = np.asarray(assignment, dtype=float)

    def F(lam: float) -> np.ndarray:
        out = E.copy()
        with np.errstate(over="ignore"):
            weights = np.power(np.float64(lam), -assignment)
        for i, block in enumerate(couplings):
            out = out + weights[i][:, None] * block
        return out

    return fixed_point_radius(F, max(1.0, spectral_radius(F(1.0))))


def _evaluate_chunk(E, couplings, shape, chunk: List[Tuple[int, ...]]):
    best, best_combo, skipped = -1.0, None, 0
    for combo in chunk:
        assignment = np.asarray(combo, dtype=int).reshape(shape)
        rho = ric_radius(E, couplings, assignment)
        if rho <= 0.0:
            skipped += 1
            continue
        if rho > best:
            best, best_combo = rho, assignment
    return best, best_combo, skipped


def _chunks(items: Iterable[Tuple[int, ...]], size: int):
    iterator = iter(items)
    while True:
        block = list(itertools.islice(iterator, size))
        if not block:
            return
        yield block


def ric_sup_radius(
    bounds: BoundMatrices,
    tau: float,
    n_tau: int,
    cap: Optional[int] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> RicResult:
    """Supremum of rho over the row-independent closure of the tau-family.

    Full enumeration of the (n_tau + 1)^{r d} assignments when it fits under
    `cap`; otherwise `cap` random assignments, and the maximum is only a
    lower estimate of the supremum.
    """

    settings = get_settings()
    cap = cap if cap is not None else settings.reduction.ric_cap
    threads = threads or settings.runtime.threads
    r, d = bounds.delay_count, bounds.dim
    if r == 0:
        raise ConfigurationError("RIC bound needs at least one delay")
    E, couplings = ric_operators(bounds, tau)
    if np.any(E < 0) or any(np.any(block < 0) for block in couplings):
        LOGGER.warning("Family at tau = %.6g has negative entries; the RIC bound is not certified", tau)
    total = (n_tau + 1) ** (r * d)
    exact = total <= cap
    if exact:
        combos: Iterable[Tuple[int, ...]] = itertools.product(range(n_tau + 1), repeat=r * d)
        evaluated = total
        LOGGER.info("Enumerating %d RIC assignments (n_tau = %d, r = %d, d = %d)", total, n_tau, r, d)
    else:
        rng = np.random.default_rng(settings.reduction.seed if seed is None else seed)
        combos = (tuple(row) for row in rng.integers(0, n_tau + 1, size=(cap, r * d)).tolist())
        evaluated = cap
        LOGGER.warning("RIC has %d assignments, sampling %d (coverage %.2e)", total, cap, cap / total)
    shape = (r, d)
    with timed(f"RIC at tau = {tau:.6g}", LOGGER):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(
                    pool.map(lambda chunk: _evaluate_chunk(E, couplings, shape, chunk), _chunks(combos, _CHUNK))
                )
        else:
            results = [_evaluate_chunk(E, couplings, shape, chunk) for chunk in _chunks(combos, _CHUNK)]
    best, best_combo, skipped = -1.0, None, 0
    for rho, combo, skip in results:
        skipped += skip
        if combo is not None and rho > best:
            best, best_combo = rho, combo
    if best_combo is None:
        return RicResult(sup_rho=0.0, argmax=[], exact=exact, evaluated=evaluated, total=total,
                         coverage=evaluated / total, skipped=skipped)
    return RicResult(
        sup_rho=best,
        argmax=best_combo.tolist(),
        exact=exact,
        evaluated=evaluated,
        total=total,
        coverage=min(1.0, evaluated / total),
        skipped=skipped,
    )


class TrendRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    tau: float
    sup_rho: float
    beta_hat: float
    exact: bool


class JsrTrend(BaseModel):
    model_config = ConfigDict(frozen=True)

    t0: float
    rows: List[TrendRow]

    @property
    def min_beta_hat(self) -> float:
        return min(row.beta_hat for row in self.rows)

    @property
    def all_below_one(self) -> bool:
        return all(row.sup_rho < 1.0 for row in self.rows)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.model_dump(include={"n", "tau", "sup_rho", "beta_hat"}) for row in self.rows])[
            ["n", "tau", "sup_rho", "beta_hat"]
        ]

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        return path


def jsr_trend(
    bounds: BoundMatrices,
    t0: float,
    n_list: Sequence[int],
    T: float,
    cap: Optional[int] = None,
) -> JsrTrend:
    """sup_rho over the RIC of the family at tau = t0 / n, with beta_hat = n (1 - sup_rho).

    T is the delay bound of the system; the lattice depth is n_tau = floor(T / tau).
    """

    if T <= 0:
        raise ConfigurationError(f"jsr_trend needs a positive delay bound, got T={T}")
    rows = []
    for n in n_list:
        tau = t0 / n
        n_tau = max(1, int(math.floor(T / tau + 1e-9)))
        result = ric_sup_radius(bounds, tau, n_tau, cap=cap)
        beta_hat = n * (1.0 - result.sup_rho)
        LOGGER.info("n = %d: sup rho %.12g, beta_hat %.6g", n, result.sup_rho, beta_hat)
        rows.append(TrendRow(n=n, tau=tau, sup_rho=result.sup_rho, beta_hat=beta_hat, exact=result.exact))
    return JsrTrend(t0=t0, rows=rows)


class AsymptoticRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: float
    error: float


class AsymptoticReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool
    abscissa: float
    rows: List[AsymptoticRow]


def _radius_excess(eigenvalues: np.ndarray, n: float) -> float:
    """rho(I + A / n) - 1 from the eigenvalues of A, without cancellation."""

    z = eigenvalues / n
    return float(np.max((2.0 * z.real + np.abs(z) ** 2) / (1.0 + np.abs(1.0 + z))))


def asymptotic_radius_check(A, n_list: Sequence[float]) -> AsymptoticReport:
    """Rows n, n |rho(I + A/n) - 1 - alpha(A)/n|; passes when the column decreases toward 0."""

    A = as_matrix(A)
    sigma = spectrum(A)
    eigenvalues = np.asarray(sigma.eigenvalues, dtype=complex)
    rows = []
    for n in n_list:
        excess = _radius_excess(eigenvalues, float(n))
        rows.append(AsymptoticRow(n=float(n), error=abs(float(n) * excess - sigma.abscissa)))
    errors = [row.error for row in rows]
    floor = get_settings().numerics.sup_atol
    passed = all(e <= floor for e in errors) or all(b < a for a, b in zip(errors[:-1], errors[1:]))
    return AsymptoticReport(passed=passed, abscissa=sigma.abscissa, rows=rows)


def gsr_lower_bound(family: Sequence[np.ndarray], max_length: int = 3) -> float:
    """max over products P of length k <= max_length of rho(P)^{1/k}."""

    mats = [as_matrix(member) for member in family]
    if not mats:
        raise ConfigurationError("gsr_lower_bound needs a nonempty family")
    best = 0.0
    for k in range(1, max_length + 1):
        for word in itertools.product(range(len(mats)), repeat=k):
            product = mats[word[0]]
            for idx in word[1:]:
                product = mats[idx] @ product
            best = max(best, spectral_radius(product) ** (1.0 / k))
    return best


__all__ = [
    "RicResult",
    "ric_operators",
    "ric_radius",
    "ric_sup_radius",
    "TrendRow",
    "JsrTrend",
    "jsr_trend",
    "AsymptoticRow",
    "AsymptoticReport",
    "asymptotic_radius_check",
    "gsr_lower_bound",
]
