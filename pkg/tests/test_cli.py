import io
import json
from pathlib import Path

import pandas as pd
import pytest

from delaygauge.cli import run
from delaygauge.model.catalog import catalog
from delaygauge.reduction.jsr import jsr_trend

SYSTEMS = Path(__file__).resolve().parents[1] / "systems"


def test_check_prints_verdicts(capsys):
    assert run(["check", "--system", "is-example"]) == 0
    out = capsys.readouterr().out
    assert "system: is-example" in out
    assert "abscissa: -0.267949" in out
    assert "verdict: STABLE" in out

    assert run(["check", "--system", "nis-example"]) == 0
    assert "verdict: NOT-INTRINSICALLY-STABLE" in capsys.readouterr().out


def test_check_json_and_parameters(capsys):
    assert run(["check", "--system", "reservoir1", "--param", "rho=0.5", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["abscissa"] == pytest.approx(-0.5)
    assert payload["verdict"] == "STABLE"


def test_check_system_file(capsys):
    assert run(["check", "--system", str(SYSTEMS / "scalar_linear.json")]) == 0
    out = capsys.readouterr().out
    assert "system: linear" in out
    assert "verdict: NOT-INTRINSICALLY-STABLE" in out


def test_invalid_input_exits_with_two(capsys):
    assert run(["check", "--system", "no-such-system"]) == 2
    assert "error:" in capsys.readouterr().err
    assert run(["check"]) == 2
    assert run(["check", "--system", "is-example", "--param", "oops"]) == 2


def test_simulate_writes_csv(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code = run(["simulate", "--system", "is-example", "--delay", "mod:2", "--t-end", "2", "--step", "0.05", "--out", str(out)])
    assert code == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["t", "x1", "x2"]
    assert frame["t"].iloc[0] == 0.0
    assert frame["t"].iloc[-1] == 2.0
    assert "wrote" in capsys.readouterr().out


def test_simulate_rejects_wrong_delay_width(tmp_path):
    out = tmp_path / "traj.csv"
    assert run(["simulate", "--system", "is-example", "--delay", "const:1,2", "--out", str(out)]) == 2
    assert not out.exists()


def test_reduce_from_stdin(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO("0.5 0.2 0.1\n0.3 0.4 0.2\n0.1 0.1 0.6\n"))
    assert run(["reduce", "--subset", "0,1"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["exists"] is True
    assert payload["preserved"] is True
    assert len(payload["reduced"]) == 2


def test_reduce_pole_exits_with_three(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO("1 0 0\n0 2 0\n0 0 3\n"))
    assert run(["reduce", "--subset", "0", "--lam", "2"]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_discretize_writes_table_and_companion(tmp_path, capsys):
    code = run(
        ["discretize", "--system", "is-example", "--delay", "mod:2", "--tau", "0.5", "--t-end", "4", "--out-dir", str(tmp_path)]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["within_bound"] is True
    assert (tmp_path / "litau_table.csv").read_text().splitlines()[0] == "k,n1"
    assert (tmp_path / "companion.csv").exists()


def test_jsr_prints_trend(capsys):
    assert run(["jsr", "--system", "is-example", "--n", "2", "--n", "4"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "n,tau,sup_rho,beta_hat"
    assert "all below one: True" in out


def test_jsr_window_defaults_to_system_delay_bound(capsys):
    assert run(["jsr", "--system", "is-example", "--n", "4"]) == 0
    table = capsys.readouterr().out.split("all below one")[0]
    cli_rows = pd.read_csv(io.StringIO(table))
    library = jsr_trend(catalog("is-example").bounds, 1.0, [4], T=3.0)
    assert cli_rows["sup_rho"].iloc[0] == pytest.approx(library.rows[0].sup_rho, abs=1e-11)

    assert run(["jsr", "--system", "is-example", "--n", "4", "--T", "1"]) == 0
    shallow = pd.read_csv(io.StringIO(capsys.readouterr().out.split("all below one")[0]))
    assert shallow["sup_rho"].iloc[0] < cli_rows["sup_rho"].iloc[0]


def test_systems_lists_catalog(capsys):
    assert run(["systems"]) == 0
    names = capsys.readouterr().out.split()
    assert "is-example" in names
    assert "reservoir2" in names
