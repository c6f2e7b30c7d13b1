"""Logging for long numerical runs: one line format, warnings routed to loggers, timed sections."""
from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from typing import Iterator, Optional

_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"


def configure_logging(level: str = "INFO") -> None:
    """Configure the root format once; numpy/scipy RuntimeWarnings go through `py.warnings`."""

    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=_FORMAT)
    logging.getLogger().setLevel(getattr(logging, level.upper(), logging.INFO))
    logging.captureWarnings(True)


def get_logger(name: Optional[str] = None) -> logging.Logger:
    return logging.getLogger(name or "delaygauge")


@contextmanager
def timed(label: str, logger: Optional[logging.Logger] = None, level: int = logging.INFO) -> Iterator[None]:
    """Log `label` with its wall-clock duration when the block exits, also on error."""

    log = logger or get_logger()
    start = time.perf_counter()
    try:
        yield
    finally:
        log.log(level, "%s finished in %.3fs", label, time.perf_counter() - start)


__all__ = ["configure_logging", "get_logger", "timed"]
