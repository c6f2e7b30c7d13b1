"""Reproduction harness: printed values from YAML cases, plus the trajectory data behind the figures."""
from __future__ import annotations

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field

from delaygauge.core.config import get_settings
from delaygauge.core.errors import ConfigurationError
from delaygauge.core.logging import timed
from delaygauge.integrate.solver import decay_fit, integrate
from delaygauge.model.catalog import catalog
from delaygauge.model.delays import ConstantDelay, ModDelay, quasiperiodic_delay
from delaygauge.model.history import constant_history
from delaygauge.reservoir.consistency import consistency_correlation
from delaygauge.reservoir.inputs import lorenz_input
from delaygauge.reservoir.simulate import Reservoir2Config, random_history_pair, simulate_reservoir2
from delaygauge.stability.analyzer import stability_matrix
from delaygauge.stability.reservoirs import reservoir1_analysis, reservoir2_analysis

LOGGER = logging.getLogger(__name__)

CASES_PATH = Path(__file__).resolve().parent / "cases.yaml"


class CaseResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    passed: bool
    abscissa: float
    stable: bool
    detail: str = ""


def load_cases(path: Path = CASES_PATH) -> List[Dict[str, Any]]:
    data = yaml.safe_load(Path(path).read_text())
    if not isinstance(data, list):
        raise ConfigurationError(f"{path}: expected a list of cases")
    return data


def _matrix_detail(entry, expected) -> str:
    exact = entry.exact_stability_matrix()
    want = [[Fraction(str(v)) for v in row] for row in expected]
    if exact is None:
        return "no rational form"
    if exact != want:
        return f"stability matrix {[[str(v) for v in row] for row in exact]} != {expected}"
    return ""


def _run_case(case: Dict[str, Any]) -> CaseResult:
    kind = case.get("kind")
    params = case.get("params", {})
    detail = ""
    if kind == "catalog":
        entry = catalog(case["system"], params)
        verdict = stability_matrix(entry.bounds, complex_valued=entry.system.complex_valued)
        abscissa, stable = verdict.abscissa, verdict.intrinsically_stable
        if "expected_matrix" in case:
            detail = _matrix_detail(entry, case["expected_matrix"])
    elif kind == "reservoir2":
        analysis = reservoir2_analysis(**params)
        abscissa, stable = analysis.abscissa, analysis.abscissa < 0
        if stable and not analysis.region_ok:
            detail = "negative abscissa outside the closed-form region"
    elif kind == "reservoir1":
        analysis = reservoir1_analysis(**params)
        abscissa, stable = analysis.abscissa, analysis.abscissa < 0
    else:
        raise ConfigurationError(f"case {case.get('id')}: unknown kind '{kind}'")
    if "expected_abscissa" in case and abs(abscissa - case["expected_abscissa"]) > case.get("atol", 1e-12):
        detail = detail or f"abscissa {abscissa:.15g}, expected {case['expected_abscissa']}"
    if "expected_stable" in case and stable != case["expected_stable"]:
        detail = detail or f"verdict {'stable' if stable else 'not stable'}, expected the opposite"
    return CaseResult(id=case["id"], passed=not detail, abscissa=abscissa, stable=stable, detail=detail)


def run_cases(path: Path = CASES_PATH) -> List[CaseResult]:
    results = [_run_case(case) for case in load_cases(path)]
    failed = [r.id for r in results if not r.passed]
    LOGGER.info("Reproduced %d cases, %d failed %s", len(results), len(failed), failed or "")
    return results


def consistency_case(gamma_sq: float, abscissa: float) -> CaseResult:
    """The reservoir consistency run as a case: gamma^2 must reach `reservoir.consistency_threshold`."""

    threshold = get_settings().reservoir.consistency_threshold
    passed = bool(np.isfinite(gamma_sq) and gamma_sq >= threshold)
    detail = "" if passed else f"gamma^2 {gamma_sq:.6g} below {threshold:g}"
    if not passed:
        LOGGER.warning("reservoir2-gamma: %s", detail)
    return CaseResult(id="reservoir2-gamma", passed=passed, abscissa=abscissa, stable=abscissa < 0, detail=detail)


class ReproSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    out_dir: str
    files: List[str] = Field(default_factory=list)
    cases: List[CaseResult] = Field(default_factory=list)
    decay_rates: Dict[str, float] = Field(default_factory=dict)
    growth: Dict[str, float] = Field(default_factory=dict)
    gamma_sq: Optional[float] = None
    reservoir_abscissa: Optional[float] = None


def _write_json(path: Path, payload: Dict[str, Any]) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def reproduce(
    out_dir: Path,
    t_end: float = 40.0,
    step: Optional[float] = None,
    reservoir_T: float = 30.0,
    seed: Optional[int] = None,
) -> ReproSummary:
    """Write verdict JSON, figure trajectory CSVs and the reservoir correlation to `out_dir`."""

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files: List[str] = []
    phi = constant_history([1.0, 1.0])

    for name, label in (("nis-example", "nis_example"), ("is-example", "is_example")):
        entry = catalog(name)
        verdict = stability_matrix(entry.bounds)
        path = out_dir / f"{label}_verdict.json"
        _write_json(path, {**verdict.model_dump(), "system": name, "verdict": verdict.label})
        files.append(path.name)

    runs = {
        "nis_const1": (catalog("nis-example"), ConstantDelay(values=[1.0])),
        "nis_mod2": (catalog("nis-example"), ModDelay(period=2.0)),
        "is_const3": (catalog("is-example"), ConstantDelay(values=[3.0])),
        "is_mod2": (catalog("is-example"), ModDelay(period=2.0)),
        "is_quasiperiodic": (catalog("is-example", T=6.0), quasiperiodic_delay()),
    }
    decay_rates: Dict[str, float] = {}
    growth: Dict[str, float] = {}
    for label, (entry, h) in runs.items():
        with timed(f"integration {label}", LOGGER, logging.DEBUG):
            traj = integrate(entry.system, h, phi, t_end, step=step)
        path = traj.to_csv(out_dir / f"{label}.csv")
        files.append(path.name)
        growth[label] = traj.sup_norm() / float(np.abs(phi.values_).sum())
        try:
            decay_rates[label] = decay_fit(traj, t_skip=0.25 * t_end).rate
        except ConfigurationError:
            decay_rates[label] = float("nan")
        LOGGER.info("%s: sup growth %.4g, decay rate %.4g", label, growth[label], decay_rates[label])

    settings = get_settings()
    t_skip = settings.reservoir.t_skip
    J = lorenz_input(t_skip + reservoir_T)
    cfg = Reservoir2Config()
    rng = np.random.default_rng(settings.reservoir.seed if seed is None else seed)
    phi1, phi2 = random_history_pair(rng, 2)
    x = simulate_reservoir2(cfg, J, phi1, t_skip + reservoir_T, step=step)
    y = simulate_reservoir2(cfg, J, phi2, t_skip + reservoir_T, step=step)
    files.append(x.to_csv(out_dir / "reservoir_response_a.csv").name)
    files.append(y.to_csv(out_dir / "reservoir_response_b.csv").name)
    gamma = consistency_correlation(x, y, reservoir_T, t_skip)
    abscissa = reservoir2_analysis(cfg.beta, cfg.delta).abscissa
    path = out_dir / "reservoir_consistency.json"
    _write_json(path, {"gamma_sq": gamma, "abscissa": abscissa, "T": reservoir_T, "t_skip": t_skip})
    files.append(path.name)

    return ReproSummary(
        out_dir=str(out_dir),
        files=files,
        cases=[*run_cases(), consistency_case(gamma, abscissa)],
        decay_rates=decay_rates,
        growth=growth,
        gamma_sq=gamma,
        reservoir_abscissa=abscissa,
    )


__all__ = ["CASES_PATH", "CaseResult", "load_cases", "run_cases", "ReproSummary", "consistency_case", "reproduce"]
