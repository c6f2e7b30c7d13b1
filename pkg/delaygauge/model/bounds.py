"""Bound matrices M0..Mr and the stability verdict built from them."""
from __future__ import annotations

from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

from delaygauge.core.errors import ConfigurationError


class BoundMatrices(BaseModel):
    """Suprema of abs*(D_x f) (M0) and |D_{y_i} f| (Mi) over the analysis domain.

    `coordinates` records whether the matrices bound f in its own state
    variables or after a change of variables (the reservoir entry); only
    state-coordinate bounds may drive the comparison system of f.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    M0: np.ndarray
    Mi: List[np.ndarray] = Field(default_factory=list)
    epsilon_shift: float = Field(default=0.0, ge=0.0)
    heuristic: bool = False
    coordinates: Literal["state", "transformed"] = "state"

    @field_validator("M0", mode="before")
    @classmethod
    def coerce_m0(cls, value):
        arr = np.asarray(value, dtype=float)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        return arr

    @field_validator("Mi", mode="before")
    @classmethod
    def coerce_mi(cls, value):
        if value is None:
            return []
        out = []
        for block in value:
            arr = np.asarray(block, dtype=float)
            out.append(arr.reshape(1, 1) if arr.ndim == 0 else arr)
        return out

    @field_serializer("M0")
    def dump_m0(self, value: np.ndarray):
        return value.tolist()

    @field_serializer("Mi")
    def dump_mi(self, value: List[np.ndarray]):
        return [block.tolist() for block in value]

    def model_post_init(self, __context) -> None:
        if self.M0.ndim != 2 or self.M0.shape[0] != self.M0.shape[1]:
            raise ConfigurationError(f"M0 must be square, got shape {self.M0.shape}")
        d = self.M0.shape[0]
        for i, block in enumerate(self.Mi, start=1):
            if block.shape != (d, d):
                raise ConfigurationError(f"M{i} has shape {block.shape}, expected {(d, d)}")
            if np.any(block < 0):
                raise ConfigurationError(f"M{i} must be entrywise nonnegative")
        off = self.M0 - np.diag(np.diag(self.M0))
        if np.any(off < 0):
            raise ConfigurationError("M0 must be nonnegative off the diagonal")
        if not (np.all(np.isfinite(self.M0)) and all(np.all(np.isfinite(b)) for b in self.Mi)):
            raise ConfigurationError("bound matrices must be finite")

    @property
    def dim(self) -> int:
        return self.M0.shape[0]

    @property
    def delay_count(self) -> int:
        return len(self.Mi)

    @property
    def shifted_M0(self) -> np.ndarray:
        return self.M0 + self.epsilon_shift * np.eye(self.dim)

    def stability_matrix(self) -> np.ndarray:
        total = self.shifted_M0.copy()
        for block in self.Mi:
            total = total + block
        return total

    def scaled(self, factor: float) -> "BoundMatrices":
        return self.model_copy(
            update={"M0": self.M0 * factor, "Mi": [b * factor for b in self.Mi], "epsilon_shift": self.epsilon_shift * factor}
        )

    def rhs(self):
        """Linear comparison field M0' x + sum Mi y_i, broadcasting over leading axes."""

        M0 = self.shifted_M0
        Mi = np.stack(self.Mi) if self.Mi else np.zeros((0, self.dim, self.dim))

        def field(t, x, ys):
            out = x @ M0.T
            if Mi.shape[0]:
                out = out + np.einsum("ijk,...ik->...j", Mi, ys)
            return out

        return field


class StabilityVerdict(BaseModel):
    """Outcome of the intrinsic-stability test alpha(stability matrix) < 0."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    stability_matrix: np.ndarray
    abscissa: float
    intrinsically_stable: bool
    margin: float
    epsilon_shift: float = 0.0
    heuristic: bool = False
    note: Optional[str] = None

    @field_serializer("stability_matrix")
    def dump_matrix(self, value: np.ndarray):
        return value.tolist()

    @property
    def label(self) -> str:
        if not self.intrinsically_stable:
            return "NOT-INTRINSICALLY-STABLE"
        if self.heuristic:
            return "STABLE (intrinsically stable relative to sampled box)"
        return "STABLE"


__all__ = ["BoundMatrices", "StabilityVerdict"]
