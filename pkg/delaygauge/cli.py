"""Command line entry point: `python -m delaygauge <command> ...`.

Exit codes: 0 success, 2 invalid input or usage, 3 numerical failure.
"""
from __future__ import annotations

import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import click
import numpy as np
import typer
import yaml
from pydantic import ValidationError
from typer.main import get_command

from delaygauge.core.config import get_settings
from delaygauge.core.errors import ConfigurationError, NumericalFailure
from delaygauge.core.logging import configure_logging
from delaygauge.discretize.companion import build_companion, companion_to_csv, table_frame
from delaygauge.discretize.litau import approximate_delay
from delaygauge.integrate.solver import integrate
from delaygauge.model.catalog import catalog_names
from delaygauge.model.delays import DelayBundle, parse_delay
from delaygauge.model.history import random_constant_history
from delaygauge.model.schema import ResolvedSystem, load_description, parse_description, resolve
from delaygauge.reduction.isospectral import isoradial_reduce, isospectral_reduce
from delaygauge.reduction.jsr import jsr_trend
from delaygauge.reservoir.consistency import consistency_sweep, sweep_to_csv
from delaygauge.stability.analyzer import analyze_system
from delaygauge.verify.comparison import random_comparison_trials, verify_comparison

LOGGER = logging.getLogger(__name__)

app = typer.Typer(add_completion=False, no_args_is_help=True, help="Stability analysis for delay differential equations.")


def _parse_params(items: Optional[Sequence[str]]) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigurationError(f"--param expects key=value, got '{item}'")
        params[key.strip()] = yaml.safe_load(value)
    return params


def _load_system(system: str, params: Optional[Sequence[str]] = None, T: Optional[float] = None) -> ResolvedSystem:
    """A catalog name or a path to a JSON system description."""

    extra = _parse_params(params)
    path = Path(system)
    if path.suffix == ".json" or path.is_file():
        description = load_description(path)
        if extra:
            description = description.model_copy(update={"params": {**description.params, **extra}})
    else:
        data: Dict[str, Any] = {"name": system, "params": extra}
        if T is not None:
            data["T"] = T
        description = parse_description(data)
    return resolve(description)


def _delays(resolved: ResolvedSystem, delay: Optional[Sequence[str]]) -> DelayBundle:
    bundle = DelayBundle(signals=[parse_delay(text) for text in delay]) if delay else resolved.delays
    if bundle.width != resolved.system.delay_count:
        raise ConfigurationError(
            f"{resolved.system.name} reads {resolved.system.delay_count} delays, got {bundle.width} (use --delay)"
        )
    return bundle


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"expected comma-separated numbers, got '{text}'") from exc


def _read_matrix(source: str) -> np.ndarray:
    text = sys.stdin.read() if source == "-" else Path(source).read_text()
    try:
        matrix = np.loadtxt(io.StringIO(text), ndmin=2)
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse matrix from {source}: {exc}") from exc
    if matrix.shape[0] != matrix.shape[1]:
        raise ConfigurationError(f"matrix must be square, got shape {matrix.shape}")
    return matrix


def _echo_json(payload: Any) -> None:
    typer.echo(json.dumps(payload, indent=2, sort_keys=True, default=float))


@app.command()
def check(
    system: str = typer.Option(..., "--system", help="Catalog name or JSON description."),
    param: Optional[List[str]] = typer.Option(None, "--param", help="Catalog parameter key=value."),
    as_json: bool = typer.Option(False, "--json", help="Print the full verdict as JSON."),
) -> None:
    """Stability verdict alpha(stability matrix) < 0."""

    resolved = _load_system(system, param)
    verdict = analyze_system(resolved.system, resolved.bounds)
    if as_json:
        _echo_json({**verdict.model_dump(), "verdict": verdict.label})
        return
    typer.echo(f"system: {resolved.system.name}")
    typer.echo(f"abscissa: {verdict.abscissa:.6g}")
    typer.echo(f"verdict: {verdict.label}")
    if verdict.epsilon_shift:
        typer.echo(f"epsilon shift: {verdict.epsilon_shift:.3g}")


@app.command()
def simulate(
    system: str = typer.Option(..., "--system"),
    delay: Optional[List[str]] = typer.Option(None, "--delay", help="e.g. const:3, mod:2, sinusoid:3;1@4"),
    t_end: float = typer.Option(40.0, "--t-end"),
    step: Optional[float] = typer.Option(None, "--step"),
    T: Optional[float] = typer.Option(None, "--T", help="Delay bound for catalog systems."),
    param: Optional[List[str]] = typer.Option(None, "--param"),
    refine: int = typer.Option(1, "--refine", min=1),
    out: Path = typer.Option(..., "--out"),
) -> None:
    """Integrate the system and write the trajectory CSV."""

    resolved = _load_system(system, param, T)
    traj = integrate(resolved.system, _delays(resolved, delay), resolved.history, t_end, step=step)
    traj.to_csv(out, refine=refine)
    typer.echo(f"wrote {out} ({traj.nodes.size} nodes, final norm {float(np.abs(traj.final_state()).sum()):.6g})")


@app.command()
def compare(
    system: Optional[str] = typer.Option(None, "--system", help="Omit for randomized catalog trials."),
    delay: Optional[List[str]] = typer.Option(None, "--delay"),
    trials: int = typer.Option(10, "--trials", min=1),
    seed: Optional[int] = typer.Option(None, "--seed"),
    t_end: float = typer.Option(30.0, "--t-end"),
    step: float = typer.Option(1e-3, "--step"),
    tol: float = typer.Option(1e-6, "--tol"),
) -> None:
    """Check |S[phi1] - S[phi2]| <= R[|phi1 - phi2|] and print the reports."""

    if system is None:
        reports = random_comparison_trials(trials, seed=seed, t_end=t_end, step=step, tol=tol)
    else:
        resolved = _load_system(system)
        if resolved.bounds is None:
            raise ConfigurationError(f"{system} has no bound matrices to compare against")
        bundle = _delays(resolved, delay)
        rng = np.random.default_rng(get_settings().reduction.seed if seed is None else seed)
        reports = []
        for _ in range(trials):
            phi1 = random_constant_history(rng, resolved.system.dim)
            phi2 = random_constant_history(rng, resolved.system.dim)
            reports.append(
                verify_comparison(resolved.system, resolved.bounds, phi1, phi2, bundle, t_end, tol=tol, step=step)
            )
    failures = sum(not r.passed for r in reports)
    _echo_json({"trials": len(reports), "failures": failures, "reports": [r.model_dump(by_alias=True) for r in reports]})


@app.command()
def discretize(
    system: str = typer.Option(..., "--system"),
    delay: Optional[List[str]] = typer.Option(None, "--delay"),
    tau: float = typer.Option(..., "--tau"),
    t_end: float = typer.Option(10.0, "--t-end"),
    T_prime: Optional[float] = typer.Option(None, "--T-prime"),
    interval: int = typer.Option(0, "--interval", min=0),
    out_dir: Path = typer.Option(Path("."), "--out-dir"),
) -> None:
    """LI_tau table and one block companion matrix."""

    resolved = _load_system(system)
    if resolved.bounds is None:
        raise ConfigurationError(f"{system} has no bound matrices")
    approx = approximate_delay(
        _delays(resolved, delay), tau, t_end, T_prime=T_prime, delay_bound=resolved.system.delay_bound
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    table_path = out_dir / "litau_table.csv"
    table_frame(approx.delay).to_csv(table_path, index=False, lineterminator="\n")
    companion = build_companion(resolved.bounds, approx.delay, interval=interval)
    companion_to_csv(companion, out_dir / "companion.csv")
    _echo_json(
        {
            "tau": tau,
            "n_tau": approx.delay.n_tau,
            "sup_error": approx.sup_error,
            "error_bound": approx.bound,
            "within_bound": approx.within_bound,
            "companion_radius": companion.radius(),
            "files": [table_path.name, "companion.csv"],
        }
    )


@app.command()
def reduce(
    matrix: str = typer.Option("-", "--matrix", help="Whitespace-separated rows; '-' reads stdin."),
    subset: str = typer.Option(..., "--subset", help="Kept indices (0-based), e.g. 0,1."),
    lam: Optional[float] = typer.Option(None, "--lam", help="Evaluate at lambda instead of rho(B)."),
) -> None:
    """Isospectral reduction at --lam, or isoradial reduction at rho(B)."""

    B = _read_matrix(matrix)
    S = [int(v) for v in _floats(subset)]
    if lam is None:
        _echo_json(isoradial_reduce(B, S).model_dump())
    else:
        reduced = np.real_if_close(isospectral_reduce(B, S, lam))
        _echo_json({"lam": lam, "reduced": np.asarray(reduced, dtype=float).tolist()})


@app.command()
def jsr(
    system: str = typer.Option("is-example", "--system"),
    t0: float = typer.Option(1.0, "--t0"),
    n: List[int] = typer.Option([4, 8], "--n"),
    T: Optional[float] = typer.Option(
        None, "--T", help="Delay bound for the lattice depth; defaults to the system delay bound."
    ),
    cap: Optional[int] = typer.Option(None, "--cap"),
    out: Optional[Path] = typer.Option(None, "--out"),
) -> None:
    """sup rho over the row-independent closure for tau = t0 / n."""

    resolved = _load_system(system)
    if resolved.bounds is None:
        raise ConfigurationError(f"{system} has no bound matrices")
    window = T if T is not None else resolved.system.delay_bound
    trend = jsr_trend(resolved.bounds, t0, n, T=window, cap=cap)
    if out is not None:
        trend.to_csv(out)
    typer.echo(trend.frame().to_csv(index=False, float_format="%.12g", lineterminator="\n"), nl=False)
    typer.echo(f"all below one: {trend.all_below_one}; min n(1 - rho): {trend.min_beta_hat:.6g}")


@app.command()
def reservoir(
    betas: str = typer.Option("0.3333333333333333", "--betas"),
    deltas: str = typer.Option("0.125", "--deltas"),
    T: float = typer.Option(30.0, "--T"),
    t_skip: Optional[float] = typer.Option(None, "--t-skip"),
    step: Optional[float] = typer.Option(None, "--step"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    out: Path = typer.Option(..., "--out"),
) -> None:
    """Consistency sweep of the sin^2 reservoir over (beta, delta)."""

    rows = consistency_sweep(_floats(betas), _floats(deltas), T=T, t_skip=t_skip, step=step, seed=seed)
    sweep_to_csv(rows, out)
    typer.echo(f"wrote {out} ({len(rows)} rows)")


@app.command()
def repro(
    out_dir: Path = typer.Option(Path("repro_out"), "--out-dir"),
    t_end: float = typer.Option(40.0, "--t-end"),
    step: Optional[float] = typer.Option(None, "--step"),
) -> None:
    """Regenerate the worked-example verdicts and figure data."""

    from delaygauge.repro.runner import reproduce

    summary = reproduce(out_dir, t_end=t_end, step=step)
    for case in summary.cases:
        typer.echo(f"{case.id}: {'ok' if case.passed else 'FAILED ' + case.detail} (abscissa {case.abscissa:.6g})")
    typer.echo(f"gamma^2 = {summary.gamma_sq:.6g}; wrote {len(summary.files)} files to {summary.out_dir}")


@app.command("systems")
def list_systems() -> None:
    """List catalog system names."""

    for name in catalog_names():
        typer.echo(name)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and map failures to exit codes."""

    configure_logging(get_settings().runtime.log_level)
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        result = get_command(app).main(args=args, prog_name="delaygauge", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 1
    except (ConfigurationError, ValidationError) as exc:
        LOGGER.error("%s", exc)
        typer.echo(f"error: {exc}", err=True)
        return 2
    except NumericalFailure as exc:
        LOGGER.error("%s", exc)
        typer.echo(f"numerical failure: {exc}", err=True)
        return 3
    return result if isinstance(result, int) else 0


def main() -> None:  # pragma: no cover
    raise SystemExit(run())


__all__ = ["app", "run", "main"]
