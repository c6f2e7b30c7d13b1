"""Time-delay signals h(t) and their bundling into a delay vector.

Each signal is a pydantic model tagged by `type`, so a list of them can be
read straight from a system JSON description. Signals are right-continuous
at their declared discontinuity lattice.
"""
from __future__ import annotations

import logging
import math
from typing import Annotated, List, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, field_validator

from delaygauge.core.errors import ConfigurationError, DelayBoundError

LOGGER = logging.getLogger(__name__)

# guards floor() against 0.3 / 0.1 = 2.9999999999999996
_FLOOR_SLACK = 1e-9


class Lattice(BaseModel):
    """Arithmetic progression {offset + spacing * n} of possible discontinuities."""

    model_config = ConfigDict(frozen=True)

    offset: float = 0.0
    spacing: PositiveFloat

    def points(self, t_start: float, t_end: float) -> np.ndarray:
        first = math.ceil((t_start - self.offset) / self.spacing - _FLOOR_SLACK)
        last = math.floor((t_end - self.offset) / self.spacing + _FLOOR_SLACK)
        if last < first:
            return np.empty(0)
        return self.offset + self.spacing * np.arange(first, last + 1)


class _DelayBase(BaseModel):
    model_config = ConfigDict(frozen=True)

    lattice: Optional[Lattice] = Field(
        default=None, description="Declared discontinuity lattice (arithmetic progression)."
    )

    @property
    def width(self) -> int:
        raise NotImplementedError

    def values(self, ts: np.ndarray) -> np.ndarray:
        """Delay values at each time, shape (len(ts), width)."""

        raise NotImplementedError

    def __call__(self, t: float) -> np.ndarray:
        return self.values(np.array([float(t)]))[0]

    def discontinuities(self) -> Optional[Lattice]:
        return self.lattice

    @property
    def freezes_argument(self) -> bool:
        """True when t - h(t) is constant between lattice points (the delayed read is a node)."""

        return False

    def upper_bound(self) -> Optional[float]:
        """A bound the signal declares on itself, if it carries one."""

        return None


class ConstantDelay(_DelayBase):
    type: Literal["constant"] = "constant"
    values_: List[NonNegativeFloat] = Field(alias="values", min_length=1)

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    @property
    def width(self) -> int:
        return len(self.values_)

    def values(self, ts: np.ndarray) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        return np.broadcast_to(np.asarray(self.values_, dtype=float), (ts.size, self.width)).copy()


class ModDelay(_DelayBase):
    """h(t) = t mod period; the delayed argument freezes on the period lattice."""

    type: Literal["mod"] = "mod"
    period: PositiveFloat

    @property
    def width(self) -> int:
        return 1

    def values(self, ts: np.ndarray) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        k = np.floor(ts / self.period + _FLOOR_SLACK)
        return np.clip(ts - k * self.period, 0.0, None).reshape(-1, 1)

    def discontinuities(self) -> Optional[Lattice]:
        return self.lattice or Lattice(offset=0.0, spacing=self.period)

    @property
    def freezes_argument(self) -> bool:
        return True


class SinusoidTerm(BaseModel):
    model_config = ConfigDict(frozen=True)

    amplitude: float
    frequency: float = Field(description="Angular frequency.")
    phase: float = 0.0


class SinusoidComponent(BaseModel):
    model_config = ConfigDict(frozen=True)

    offset: float
    terms: List[SinusoidTerm] = Field(default_factory=list)


class SinusoidSumDelay(_DelayBase):
    """Each component is offset + sum(amplitude * sin(frequency * t + phase))."""

    type: Literal["sinusoid_sum"] = "sinusoid_sum"
    components: List[SinusoidComponent] = Field(min_length=1)

    @property
    def width(self) -> int:
        return len(self.components)

    def values(self, ts: np.ndarray) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        out = np.empty((ts.size, self.width))
        for i, comp in enumerate(self.components):
            col = np.full(ts.size, comp.offset)
            for term in comp.terms:
                col += term.amplitude * np.sin(term.frequency * ts + term.phase)
            out[:, i] = col
        return out


class LiTauDelay(_DelayBase):
    """Piecewise unit-slope delay with lattice-valued anchors.

    On [start + k tau, start + (k+1) tau) component i equals
    table[i][k] * tau + (t - start - k tau); T' = n_tau * tau.
    """

    type: Literal["li_tau"] = "li_tau"
    tau: PositiveFloat
    n_tau: int = Field(ge=1)
    table: List[List[int]] = Field(min_length=1)
    start: float = 0.0

    @field_validator("table")
    @classmethod
    def rectangular(cls, value: List[List[int]]) -> List[List[int]]:
        lengths = {len(row) for row in value}
        if len(lengths) != 1 or 0 in lengths:
            raise ValueError("table rows must be non-empty and of equal length")
        return value

    def model_post_init(self, __context) -> None:
        bad = [n for row in self.table for n in row if n < 0 or n > self.n_tau]
        if bad:
            raise ConfigurationError(f"LI_tau anchors must lie in 0..{self.n_tau}, got {bad[:3]}")

    @property
    def width(self) -> int:
        return len(self.table)

    @property
    def intervals(self) -> int:
        return len(self.table[0])

    @property
    def T_prime(self) -> float:
        return self.n_tau * self.tau

    def interval_index(self, ts: np.ndarray) -> np.ndarray:
        k = np.floor((np.asarray(ts, dtype=float) - self.start) / self.tau + _FLOOR_SLACK).astype(int)
        return np.clip(k, 0, self.intervals - 1)

    def values(self, ts: np.ndarray) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        k = self.interval_index(ts)
        anchors = np.asarray(self.table, dtype=float)[:, k].T * self.tau
        offset = np.clip(ts - self.start - k * self.tau, 0.0, None)
        return anchors + offset[:, None]

    def indices(self, k: int) -> List[int]:
        """Anchor indices n_{i,k} of every component on interval k."""

        return [row[k] for row in self.table]

    def discontinuities(self) -> Optional[Lattice]:
        return self.lattice or Lattice(offset=self.start, spacing=self.tau)

    @property
    def freezes_argument(self) -> bool:
        return True

    def upper_bound(self) -> Optional[float]:
        return self.T_prime


class SampledDelay(_DelayBase):
    """Piecewise-linear interpolation of delay samples (ends held constant)."""

    type: Literal["samples"] = "samples"
    times: List[float] = Field(min_length=2)
    samples: List[List[NonNegativeFloat]] = Field(description="One row per time, one column per component.")

    def model_post_init(self, __context) -> None:
        if len(self.samples) != len(self.times):
            raise ConfigurationError("samples must have one row per time")
        if np.any(np.diff(self.times) <= 0):
            raise ConfigurationError("sample times must be strictly increasing")

    @property
    def width(self) -> int:
        return len(self.samples[0])

    def values(self, ts: np.ndarray) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        grid = np.asarray(self.times, dtype=float)
        table = np.asarray(self.samples, dtype=float)
        return np.column_stack([np.interp(ts, grid, table[:, i]) for i in range(self.width)])


DelaySignal = Annotated[
    Union[ConstantDelay, ModDelay, SinusoidSumDelay, LiTauDelay, SampledDelay],
    Field(discriminator="type"),
]


class DelayBundle(BaseModel):
    """Concatenation of several signals into one delay vector h(t) in R^r."""

    model_config = ConfigDict(frozen=True)

    signals: List[DelaySignal] = Field(default_factory=list)

    @property
    def width(self) -> int:
        return sum(signal.width for signal in self.signals)

    def values(self, ts: np.ndarray) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if not self.signals:
            return np.empty((ts.size, 0))
        return np.hstack([signal.values(ts) for signal in self.signals])

    def __call__(self, t: float) -> np.ndarray:
        return self.values(np.array([float(t)]))[0]

    def lattices(self) -> List[Lattice]:
        return [lat for lat in (signal.discontinuities() for signal in self.signals) if lat is not None]

    def frozen_components(self) -> np.ndarray:
        flags: List[bool] = []
        for signal in self.signals:
            flags.extend([signal.freezes_argument] * signal.width)
        return np.asarray(flags, dtype=bool)

    def upper_bound(self) -> Optional[float]:
        bounds = [b for b in (signal.upper_bound() for signal in self.signals) if b is not None]
        return max(bounds) if bounds else None

    def breakpoints(self, t_start: float, t_end: float) -> np.ndarray:
        pts = [lat.points(t_start, t_end) for lat in self.lattices()]
        if not pts:
            return np.empty(0)
        return np.unique(np.concatenate(pts))

    def sample_times(self, t_start: float, t_end: float, resolution: float) -> np.ndarray:
        """Uniform samples at `resolution` plus every breakpoint and its left neighbour."""

        count = max(2, int(math.ceil((t_end - t_start) / resolution)) + 1)
        grid = np.linspace(t_start, t_end, count)
        bps = self.breakpoints(t_start, t_end)
        left = bps - 1e-9 * max(1.0, abs(t_end))
        extra = np.concatenate([bps, left[left >= t_start]])
        return np.unique(np.concatenate([grid, extra]))

    def min_positive_delay(self, t_start: float, t_end: float, resolution: float) -> float:
        """Smallest positive delay among components whose delayed read is not frozen."""

        live = ~self.frozen_components()
        if not np.any(live):
            return math.inf
        vals = self.values(self.sample_times(t_start, t_end, resolution))[:, live]
        positive = vals[vals > 0]
        return float(positive.min()) if positive.size else math.inf


def as_bundle(h: Union[DelayBundle, _DelayBase, Sequence[_DelayBase], None]) -> DelayBundle:
    """Normalise a signal, a list of signals, or a bundle to a bundle."""

    if h is None:
        return DelayBundle(signals=[])
    if isinstance(h, DelayBundle):
        return h
    if isinstance(h, _DelayBase):
        return DelayBundle(signals=[h])
    return DelayBundle(signals=list(h))


def evaluate_delay(h, t: float, bound: float) -> np.ndarray:
    """Return h(t), refusing any component outside [0, bound]."""

    if t < 0:
        raise ConfigurationError(f"delays are evaluated for t >= 0, got {t}")
    values = as_bundle(h)(t)
    _check_row(values, t, bound)
    return values


def _check_row(values: np.ndarray, t: float, bound: float, atol: float = 1e-12) -> None:
    for i, value in enumerate(values):
        if not (-atol <= value <= bound + atol):
            raise DelayBoundError(
                f"delay component {i} = {value:.6g} at t = {t:.6g} leaves [0, {bound:.6g}]",
                component=i,
                time=float(t),
            )


def check_delay_range(h, bound: float, t_start: float, t_end: float, resolution: Optional[float] = None) -> None:
    """Sample h on [t_start, t_end] (resolution 1e-3 * bound plus breakpoints) and check the range."""

    bundle = as_bundle(h)
    if bundle.width == 0:
        return
    step = resolution or 1e-3 * bound
    times = bundle.sample_times(t_start, t_end, step)
    table = bundle.values(times)
    bad = np.argwhere((table < -1e-12) | (table > bound + 1e-12))
    if bad.size:
        row, comp = bad[0]
        _check_row(table[row], float(times[row]), bound)


def parse_delay(text: str) -> DelaySignal:
    """Parse the CLI shorthand: `const:3`, `const:0.4,0.7`, `mod:2`, `sinusoid:3;1@4;1@3.14159;1@1.732@1.5708`."""

    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind in ("const", "constant"):
            return ConstantDelay(values=[float(v) for v in body.split(",")])
        if kind == "mod":
            return ModDelay(period=float(body))
        if kind in ("sinusoid", "sinusoid_sum"):
            components = []
            for chunk in body.split("|"):
                parts = [p for p in chunk.split(";") if p.strip()]
                terms = []
                for part in parts[1:]:
                    fields = [float(v) for v in part.split("@")]
                    terms.append(SinusoidTerm(amplitude=fields[0], frequency=fields[1], phase=fields[2] if len(fields) > 2 else 0.0))
                components.append(SinusoidComponent(offset=float(parts[0]), terms=terms))
            return SinusoidSumDelay(components=components)
    except (ValueError, IndexError) as exc:
        raise ConfigurationError(f"cannot parse delay '{text}': {exc}") from exc
    raise ConfigurationError(f"unknown delay kind '{kind}' in '{text}'")


def quasiperiodic_delay() -> SinusoidSumDelay:
    """h(t) = 3 + sin(4t) + sin(pi t) + cos(sqrt(3) t)."""

    return SinusoidSumDelay(
        components=[
            SinusoidComponent(
                offset=3.0,
                terms=[
                    SinusoidTerm(amplitude=1.0, frequency=4.0),
                    SinusoidTerm(amplitude=1.0, frequency=math.pi),
                    SinusoidTerm(amplitude=1.0, frequency=math.sqrt(3.0), phase=math.pi / 2),
                ],
            )
        ]
    )


__all__ = [
    "Lattice",
    "ConstantDelay",
    "ModDelay",
    "SinusoidTerm",
    "SinusoidComponent",
    "SinusoidSumDelay",
    "LiTauDelay",
    "SampledDelay",
    "DelaySignal",
    "DelayBundle",
    "as_bundle",
    "evaluate_delay",
    "check_delay_range",
    "parse_delay",
    "quasiperiodic_delay",
]
