"""Dense solutions of delay systems: history on [t0 - T, t0] then Hermite pieces."""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from delaygauge.core.errors import ConfigurationError
from delaygauge.model.history import AnyHistory, hermite_ppoly


class Trajectory:
    """Piecewise-cubic solution with exact history before t0.

    `start_slopes[k]` is the right derivative at `nodes[k]` and
    `end_slopes[k]` the left derivative at `nodes[k + 1]`; they differ only at
    breakpoints where a delay jumps.
    """

    def __init__(
        self,
        nodes: np.ndarray,
        states: np.ndarray,
        start_slopes: np.ndarray,
        end_slopes: np.ndarray,
        history: AnyHistory,
        span: float,
        breakpoints: Optional[np.ndarray] = None,
    ) -> None:
        if nodes.size < 2:
            raise ConfigurationError("a trajectory needs at least one step")
        self.nodes = nodes
        self.states = states
        self.start_slopes = start_slopes
        self.end_slopes = end_slopes
        self.history = history
        self.span = float(span)
        self.breakpoints = np.empty(0) if breakpoints is None else breakpoints
        self._pieces = hermite_ppoly(nodes, states, start_slopes, end_slopes)

    @property
    def t0(self) -> float:
        return float(self.nodes[0])

    @property
    def t1(self) -> float:
        return float(self.nodes[-1])

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.states)

    def _check_span(self, times: np.ndarray) -> None:
        slack = 1e-9 * max(1.0, abs(self.t1))
        if np.any(times < self.t0 - self.span - slack) or np.any(times > self.t1 + slack):
            raise ConfigurationError(
                f"trajectory covers [{self.t0 - self.span:.6g}, {self.t1:.6g}], "
                f"asked for [{times.min():.6g}, {times.max():.6g}]"
            )

    def evaluate(self, times) -> np.ndarray:
        """x(t) for each t, shape (len(times), dim)."""

        times = np.atleast_1d(np.asarray(times, dtype=float))
        self._check_span(times)
        out = np.empty((times.size, self.dim), dtype=self.states.dtype)
        before = times < self.t0
        if np.any(before):
            out[before] = self.history.values(times[before] - self.t0)
        if np.any(~before):
            out[~before] = self._pieces(np.clip(times[~before], self.t0, self.t1))
        return out

    def __call__(self, t: float) -> np.ndarray:
        return self.evaluate([t])[0]

    def derivative(self, times, side: str = "right") -> np.ndarray:
        """x'(t); at breakpoints `side` picks the one-sided derivative."""

        times = np.atleast_1d(np.asarray(times, dtype=float))
        self._check_span(times)
        out = np.empty((times.size, self.dim), dtype=self.states.dtype)
        before = times < self.t0 if side == "right" else times <= self.t0
        if np.any(before):
            out[before] = self.history.derivative(np.minimum(times[before] - self.t0, 0.0))
        rest = ~before
        if np.any(rest):
            t = np.clip(times[rest], self.t0, self.t1)
            if side == "right":
                out[rest] = self._pieces(t, 1)
            else:
                k = np.clip(np.searchsorted(self.nodes, t, side="left") - 1, 0, self.nodes.size - 2)
                c = self._pieces.c[:, k]
                dt = (t - self.nodes[k])[:, None]
                out[rest] = 3.0 * c[0] * dt**2 + 2.0 * c[1] * dt + c[2]
        return out

    def dense_times(self, refine: int = 2, t_start: Optional[float] = None, t_end: Optional[float] = None) -> np.ndarray:
        """Nodes plus `refine - 1` interior points per step, restricted to [t_start, t_end]."""

        lo = self.t0 if t_start is None else t_start
        hi = self.t1 if t_end is None else t_end
        if refine <= 1:
            grid = self.nodes
        else:
            frac = np.arange(refine) / refine
            grid = (self.nodes[:-1, None] + np.diff(self.nodes)[:, None] * frac[None, :]).ravel()
            grid = np.append(grid, self.nodes[-1])
        return grid[(grid >= lo - 1e-12) & (grid <= hi + 1e-12)]

    def norms(self, times=None) -> np.ndarray:
        """1-norm of the state at `times` (default: the nodes)."""

        values = self.states if times is None else self.evaluate(times)
        return np.abs(values).sum(axis=1)

    def sup_norm(self, t_start: Optional[float] = None, t_end: Optional[float] = None, refine: int = 2) -> float:
        return float(self.norms(self.dense_times(refine, t_start, t_end)).max())

    def final_state(self) -> np.ndarray:
        return self.states[-1].copy()

    def to_frame(self, refine: int = 1) -> pd.DataFrame:
        times = self.dense_times(refine)
        values = self.evaluate(times)
        frame = pd.DataFrame({"t": times})
        for i in range(self.dim):
            if self.is_complex:
                frame[f"x{i + 1}_re"] = values[:, i].real
                frame[f"x{i + 1}_im"] = values[:, i].imag
            else:
                frame[f"x{i + 1}"] = values[:, i]
        return frame

    def to_csv(self, path: Union[str, Path], refine: int = 1) -> Path:
        path = Path(path)
        self.to_frame(refine).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        return path


__all__ = ["Trajectory"]
