"""Initial-condition functions phi on [-T, 0] and their norms.

Closed forms (constant, polynomial, sinusoid) are evaluable for any s <= 0;
sampled histories interpolate a grid with cubic Hermite pieces. Norms use
the 1-norm on R^d and are maxima over a sample grid.
"""
from __future__ import annotations

import logging
from typing import Annotated, Callable, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_serializer, field_validator
from scipy.interpolate import PPoly

from delaygauge.core.config import get_settings
from delaygauge.core.errors import ConfigurationError

LOGGER = logging.getLogger(__name__)


def hermite_ppoly(x: np.ndarray, y: np.ndarray, start_slopes: np.ndarray, end_slopes: np.ndarray) -> PPoly:
    """Piecewise cubic through (x, y) with slope start_slopes[k] / end_slopes[k] at the ends of piece k.

    Evaluation at a node uses the piece to its right, so values and
    derivatives are right-continuous.
    """

    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    width = np.diff(x)[:, None]
    secant = (y[1:] - y[:-1]) / width
    m0, m1 = np.asarray(start_slopes), np.asarray(end_slopes)
    c = np.empty((4,) + m0.shape, dtype=np.result_type(y, m0, m1, float))
    c[0] = (m0 + m1 - 2.0 * secant) / width**2
    c[1] = (3.0 * secant - 2.0 * m0 - m1) / width
    c[2] = m0
    c[3] = y[:-1]
    return PPoly(c, x, extrapolate=True)


class _HistoryBase(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    span: Optional[float] = Field(default=None, gt=0, description="Window length T; None means any s <= 0.")

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def values(self, s: np.ndarray) -> np.ndarray:
        """phi(s) for each s, shape (len(s), dim)."""

        raise NotImplementedError

    def derivative(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, s: float) -> np.ndarray:
        return self.values(np.array([float(s)]))[0]

    def resolve_span(self, span: Optional[float] = None) -> float:
        value = span if span is not None else self.span
        if value is None:
            raise ConfigurationError("history norms need a window length T")
        return float(value)

    def sample_grid(self, span: Optional[float] = None, points: Optional[int] = None) -> np.ndarray:
        count = points or get_settings().integrator.history_grid
        return np.linspace(-self.resolve_span(span), 0.0, count)

    def sup_norm(self, span: Optional[float] = None, points: Optional[int] = None) -> float:
        grid = self.sample_grid(span, points)
        return float(np.abs(self.values(grid)).sum(axis=1).max())

    def lipschitz(self, span: Optional[float] = None, points: Optional[int] = None) -> float:
        """Largest divided difference between neighbouring grid samples."""

        grid = self.sample_grid(span, points)
        vals = self.values(grid)
        if grid.size < 2:
            return 0.0
        ratios = np.abs(np.diff(vals, axis=0)).sum(axis=1) / np.diff(grid)
        return float(ratios.max())

    def c01_norm(self, span: Optional[float] = None, points: Optional[int] = None) -> float:
        return self.sup_norm(span, points) + self.lipschitz(span, points)

    def _check_domain(self, s: np.ndarray) -> None:
        if np.any(s > 1e-12):
            raise ConfigurationError(f"history evaluated at s = {float(s.max()):.6g} > 0")


def _float_list(value):
    return [float(v) for v in np.atleast_1d(np.asarray(value, dtype=float))]


class ConstantHistory(_HistoryBase):
    kind: Literal["constant"] = "constant"
    values_: List[float] = Field(alias="values", min_length=1)

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    @field_validator("values_", mode="before")
    @classmethod
    def coerce(cls, value):
        return _float_list(value)

    @property
    def dim(self) -> int:
        return len(self.values_)

    def values(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        self._check_domain(s)
        return np.broadcast_to(np.asarray(self.values_), (s.size, self.dim)).copy()

    def derivative(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.zeros((s.size, self.dim))

    def lipschitz(self, span: Optional[float] = None, points: Optional[int] = None) -> float:
        return 0.0


class PolynomialHistory(_HistoryBase):
    """Component i is sum_k coefficients[i][k] * s**k."""

    kind: Literal["polynomial"] = "polynomial"
    coefficients: List[List[float]] = Field(min_length=1)

    @property
    def dim(self) -> int:
        return len(self.coefficients)

    def values(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        self._check_domain(s)
        return np.column_stack([np.polynomial.polynomial.polyval(s, c) for c in self.coefficients])

    def derivative(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        cols = []
        for c in self.coefficients:
            der = np.polynomial.polynomial.polyder(c) if len(c) > 1 else [0.0]
            cols.append(np.polynomial.polynomial.polyval(s, der))
        return np.column_stack(cols)


class SinusoidHistory(_HistoryBase):
    """Component i is offset[i] + amplitude[i] * sin(frequency[i] * s + phase[i])."""

    kind: Literal["sinusoid"] = "sinusoid"
    offset: List[float]
    amplitude: List[float]
    frequency: List[float]
    phase: Optional[List[float]] = None

    def model_post_init(self, __context) -> None:
        sizes = {len(self.offset), len(self.amplitude), len(self.frequency)}
        if self.phase is not None:
            sizes.add(len(self.phase))
        if len(sizes) != 1:
            raise ConfigurationError("sinusoid history fields must share one length")

    @property
    def dim(self) -> int:
        return len(self.offset)

    def _arrays(self):
        phase = self.phase if self.phase is not None else [0.0] * self.dim
        return (np.asarray(self.offset), np.asarray(self.amplitude), np.asarray(self.frequency), np.asarray(phase))

    def values(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        self._check_domain(s)
        off, amp, freq, phase = self._arrays()
        return off + amp * np.sin(np.outer(s, freq) + phase)

    def derivative(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        _, amp, freq, phase = self._arrays()
        return amp * freq * np.cos(np.outer(s, freq) + phase)


class SampledHistory(_HistoryBase):
    """Grid samples joined by cubic Hermite pieces.

    `slopes` are right derivatives at the nodes (finite differences if absent);
    `end_slopes`, when given, are left derivatives and let a piece end with a
    different slope than the next one starts with.
    """

    kind: Literal["sampled"] = "sampled"
    grid: np.ndarray
    samples: np.ndarray
    slopes: Optional[np.ndarray] = None
    end_slopes: Optional[np.ndarray] = None

    _spline: PPoly = PrivateAttr()

    @field_validator("grid", mode="before")
    @classmethod
    def coerce_grid(cls, value):
        return np.asarray(value, dtype=float).ravel()

    @field_validator("samples", "slopes", "end_slopes", mode="before")
    @classmethod
    def coerce_table(cls, value):
        if value is None:
            return None
        arr = np.asarray(value)
        arr = arr.astype(complex if np.iscomplexobj(arr) else float)
        return arr.reshape(-1, 1) if arr.ndim == 1 else arr

    @field_serializer("grid", "samples", "slopes", "end_slopes")
    def dump_array(self, value):
        return None if value is None else value.tolist()

    def model_post_init(self, __context) -> None:
        if self.grid.size < 2 or self.samples.shape[0] != self.grid.size:
            raise ConfigurationError("sampled history needs at least two grid points and one row per point")
        if np.any(np.diff(self.grid) <= 0):
            raise ConfigurationError("history grid must be strictly increasing")
        if self.grid[-1] < -1e-12 or self.grid[-1] > 1e-12:
            raise ConfigurationError("history grid must end at s = 0")
        slopes = self.slopes if self.slopes is not None else np.gradient(self.samples, self.grid, axis=0)
        ends = self.end_slopes if self.end_slopes is not None else slopes
        self._spline = hermite_ppoly(self.grid, self.samples, slopes[:-1], ends[1:])

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    def resolve_span(self, span: Optional[float] = None) -> float:
        return float(span if span is not None else -self.grid[0])

    def _clip(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        tol = get_settings().integrator.interpolation_tol
        if np.any(s < self.grid[0] - tol) or np.any(s > tol):
            raise ConfigurationError(
                f"sampled history covers [{self.grid[0]:.6g}, 0], asked for [{s.min():.6g}, {s.max():.6g}]"
            )
        return np.clip(s, self.grid[0], 0.0)

    def values(self, s: np.ndarray) -> np.ndarray:
        return self._spline(self._clip(s))

    def derivative(self, s: np.ndarray) -> np.ndarray:
        return self._spline(self._clip(s), 1)


class FunctionHistory(_HistoryBase):
    """History given by a vectorised callable s -> (len(s), dim); not serialisable."""

    kind: Literal["function"] = "function"
    func: Callable[[np.ndarray], np.ndarray]
    dim_: int = Field(alias="dim", ge=1)

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True, populate_by_name=True)

    @property
    def dim(self) -> int:
        return self.dim_

    def values(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.asarray(self.func(s), dtype=float).reshape(s.size, self.dim)

    def derivative(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        step = 1e-7
        return (self.values(s) - self.values(s - step)) / step


HistoryFunction = Annotated[
    Union[ConstantHistory, PolynomialHistory, SinusoidHistory, SampledHistory],
    Field(discriminator="kind"),
]

AnyHistory = Union[ConstantHistory, PolynomialHistory, SinusoidHistory, SampledHistory, FunctionHistory]


def constant_history(values, span: Optional[float] = None) -> ConstantHistory:
    return ConstantHistory(values=_float_list(values), span=span)


def abs_difference(phi1: _HistoryBase, phi2: _HistoryBase) -> FunctionHistory:
    """Pointwise componentwise |phi1 - phi2|."""

    if phi1.dim != phi2.dim:
        raise ConfigurationError(f"history dimensions differ: {phi1.dim} vs {phi2.dim}")
    return FunctionHistory(func=lambda s: np.abs(phi1.values(s) - phi2.values(s)), dim=phi1.dim, span=phi1.span or phi2.span)


def random_constant_history(rng: np.random.Generator, dim: int, low: float = -1.0, high: float = 1.0) -> ConstantHistory:
    """Constant-in-s history with components uniform on [low, high]."""

    return ConstantHistory(values=rng.uniform(low, high, size=dim).tolist())


__all__ = [
    "ConstantHistory",
    "PolynomialHistory",
    "SinusoidHistory",
    "SampledHistory",
    "FunctionHistory",
    "HistoryFunction",
    "hermite_ppoly",
    "AnyHistory",
    "constant_history",
    "abs_difference",
    "random_constant_history",
]
