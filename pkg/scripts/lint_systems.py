#!/usr/bin/env python3
"""System file lint: every description in systems/ must validate and resolve."""
from __future__ import annotations

from pathlib import Path
import sys
from typing import List

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from delaygauge.core.errors import DelayGaugeError
from delaygauge.model.schema import load_description, resolve

SYSTEMS_ROOT = ROOT / "systems"


def main() -> None:
    warnings: List[str] = []
    for path in sorted(SYSTEMS_ROOT.glob("*.json")):
        try:
            resolved = resolve(load_description(path))
        except DelayGaugeError as exc:
            warnings.append(f"{path.name}: {exc}")
            continue
        if resolved.delays.width != resolved.system.delay_count:
            warnings.append(
                f"{path.name}: {resolved.delays.width} delay components for "
                f"{resolved.system.delay_count} delayed arguments"
            )
        if resolved.bounds is None:
            warnings.append(f"{path.name}: no bound matrices; check will fall back to sampling")
    if warnings:
        print("System lint warnings:")
        for warning in warnings:
            print("-", warning)
        raise SystemExit(1)
    print("System lint passed: all descriptions resolve.")


if __name__ == "__main__":
    main()
