#!/usr/bin/env python3
"""Regenerate the worked-example verdicts and figure data into ./repro_out."""
from pathlib import Path
import sys

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from delaygauge.core.config import get_settings
from delaygauge.core.logging import configure_logging
from delaygauge.repro.runner import reproduce


def main():  # pragma: no cover
    configure_logging(get_settings().runtime.log_level)
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "repro_out"
    summary = reproduce(out_dir)
    failed = [case.id for case in summary.cases if not case.passed]
    print(f"wrote {len(summary.files)} files to {summary.out_dir}")
    print(f"gamma^2 = {summary.gamma_sq:.6g}, reservoir abscissa = {summary.reservoir_abscissa:.6g}")
    if failed:
        print("cases failed:", ", ".join(failed))
        raise SystemExit(1)


if __name__ == "__main__":
    main()
