"""JSON system descriptions consumed by the command line and the lint script."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from delaygauge.core.errors import ConfigurationError
from delaygauge.model.bounds import BoundMatrices
from delaygauge.model.catalog import catalog
from delaygauge.model.delays import DelayBundle, DelaySignal
from delaygauge.model.history import AnyHistory, HistoryFunction, constant_history
from delaygauge.model.system import SystemSpec, load_rhs


class BoundsDescription(BaseModel):
    M0: List[List[float]]
    Mi: List[List[List[float]]] = Field(default_factory=list)


class SystemDescription(BaseModel):
    """Either a catalog `name` (with `params`) or a plugin `rhs` with `dim` and `T`."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    name: Optional[str] = None
    rhs: Optional[str] = Field(default=None, description="Plugin right-hand side as 'module:function'.")
    dim: Optional[int] = Field(default=None, ge=1)
    delays: List[DelaySignal] = Field(default_factory=list)
    T: Optional[float] = Field(default=None, gt=0)
    bounds: Optional[BoundsDescription] = None
    history: Optional[HistoryFunction] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    complex_valued: bool = Field(default=False, alias="complex")
    vectorized: bool = False

    @model_validator(mode="after")
    def one_source(self) -> "SystemDescription":
        if (self.name is None) == (self.rhs is None):
            raise ValueError("give exactly one of 'name' (catalog) or 'rhs' (plugin)")
        if self.rhs is not None and (self.dim is None or self.T is None):
            raise ValueError("plugin systems need 'dim' and 'T'")
        return self


class ResolvedSystem(BaseModel):
    """A description turned into live objects."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    system: SystemSpec
    bounds: Optional[BoundMatrices] = None
    delays: DelayBundle
    history: AnyHistory
    lipschitz: Optional[float] = None


def resolve(description: SystemDescription) -> ResolvedSystem:
    bundle = DelayBundle(signals=list(description.delays))
    declared = None
    if description.bounds is not None:
        declared = BoundMatrices(M0=description.bounds.M0, Mi=description.bounds.Mi)
    if description.name is not None:
        params = dict(description.params)
        if description.T is not None:
            params.setdefault("T", description.T)
        entry = catalog(description.name, params)
        system, bounds, lipschitz = entry.system, declared or entry.bounds, entry.lipschitz
    else:
        delay_count = bundle.width
        system = SystemSpec(
            name=description.rhs,
            dim=description.dim,
            delay_count=delay_count,
            delay_bound=description.T,
            rhs=load_rhs(description.rhs),
            vectorized=description.vectorized,
            complex_valued=description.complex_valued,
        )
        bounds, lipschitz = declared, None
    history = description.history or constant_history([1.0] * system.dim)
    if history.dim != system.dim:
        raise ConfigurationError(f"history has {history.dim} components, system has {system.dim}")
    return ResolvedSystem(system=system, bounds=bounds, delays=bundle, history=history, lipschitz=lipschitz)


def _format_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err.get("loc", ())) or "<root>"
        parts.append(f"{path}: {err.get('msg')}")
    return "; ".join(parts)


def parse_description(data: Any) -> SystemDescription:
    try:
        return SystemDescription.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid system description: {_format_error(exc)}") from exc


def load_description(path: Path) -> SystemDescription:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    return parse_description(data)


__all__ = [
    "BoundsDescription",
    "SystemDescription",
    "ResolvedSystem",
    "resolve",
    "parse_description",
    "load_description",
]
