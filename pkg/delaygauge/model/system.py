"""DDE instances x'(t) = f(t, x(t), x(t - h_1(t)), ..., x(t - h_r(t)))."""
from __future__ import annotations

import importlib
import logging
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from delaygauge.core.errors import ConfigurationError
from delaygauge.model.bounds import BoundMatrices

LOGGER = logging.getLogger(__name__)

# f(t, x, ys) with x of shape (..., d) and ys of shape (..., r, d)
RightHandSide = Callable[[float, np.ndarray, np.ndarray], np.ndarray]


class SystemSpec(BaseModel):
    """A delay system: dimension, delay count, delay bound and right-hand side."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str = "custom"
    dim: int = Field(ge=1)
    delay_count: int = Field(ge=0)
    delay_bound: float = Field(gt=0, description="T; every delay component lies in [0, T].")
    rhs: RightHandSide
    vectorized: bool = Field(default=False, description="rhs broadcasts over leading axes of x and ys.")
    complex_valued: bool = False
    autonomous: bool = True
    lipschitz: Optional[float] = Field(default=None, ge=0, description="L0 in the 1-norm, when known.")

    def evaluate(self, t: float, x: np.ndarray, ys: np.ndarray) -> np.ndarray:
        out = np.asarray(self.rhs(t, x, ys))
        if out.shape[-1] != self.dim:
            raise ConfigurationError(f"{self.name}: rhs returned {out.shape[-1]} components, expected {self.dim}")
        return out

    def evaluate_batch(self, t: float, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """f over a batch: X (n, d), Y (n, r, d) -> (n, d)."""

        if self.vectorized:
            return self.evaluate(t, X, Y)
        return np.stack([self.evaluate(t, X[k], Y[k]) for k in range(X.shape[0])])

    def with_bound(self, delay_bound: float) -> "SystemSpec":
        return self.model_copy(update={"delay_bound": float(delay_bound)})


def linear_system(bounds: BoundMatrices, delay_bound: float, name: str = "comparison") -> SystemSpec:
    """The real linear comparison system x' = M0' x + sum Mi x(t - h_i)."""

    return SystemSpec(
        name=name,
        dim=bounds.dim,
        delay_count=bounds.delay_count,
        delay_bound=delay_bound,
        rhs=bounds.rhs(),
        vectorized=True,
        lipschitz=max([float(np.abs(bounds.shifted_M0).sum(axis=0).max())] + [float(b.sum(axis=0).max()) for b in bounds.Mi]),
    )


def load_rhs(target: str) -> RightHandSide:
    """Import a user right-hand side given as `package.module:function`."""

    module_name, _, attr = target.partition(":")
    if not module_name or not attr:
        raise ConfigurationError(f"rhs must look like 'module:function', got '{target}'")
    try:
        module = importlib.import_module(module_name)
    except ImportError as exc:
        raise ConfigurationError(f"cannot import rhs module '{module_name}': {exc}") from exc
    func = getattr(module, attr, None)
    if not callable(func):
        raise ConfigurationError(f"'{target}' is not a callable")
    return func


__all__ = ["SystemSpec", "RightHandSide", "linear_system", "load_rhs"]
