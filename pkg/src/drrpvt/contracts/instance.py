"""Problem instance contracts.

A ``ProblemInstance`` bundles stations, the carrier fleet, the trailer pool,
expected demand, economics and distances for one planning horizon. Tensors
are stored as nested lists (the JSON interchange form) and exposed as cached
numpy views for the numerical code.
"""

from enum import Enum
from functools import cached_property
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class OperatingMode(str, Enum):
    """Which repositioning resources a plan may use."""

    JOINT = "joint"
    VEHICLES_ONLY = "vehicles"
    TRAILERS_ONLY = "trailers"

    @property
    def uses_vehicles(self) -> bool:
        return self is not OperatingMode.TRAILERS_ONLY

    @property
    def uses_trailers(self) -> bool:
        return self is not OperatingMode.VEHICLES_ONLY


class Station(BaseModel):
    """A docking station."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(..., description="Station identifier")
    latitude: float = Field(..., ge=-90.0, le=90.0, description="Degrees")
    longitude: float = Field(..., ge=-180.0, le=180.0, description="Degrees")
    capacity: int = Field(..., ge=0, description="Dock count")
    initial_bikes: int = Field(..., ge=0, description="Bikes docked at epoch 0")

    @model_validator(mode="after")
    def _bikes_fit_docks(self) -> "Station":
        if self.initial_bikes > self.capacity:
            raise ValueError(
                f"station {self.id}: initial_bikes {self.initial_bikes} exceeds capacity {self.capacity}"
            )
        return self


class Vehicle(BaseModel):
    """A carrier vehicle."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(..., description="Vehicle identifier")
    capacity: int = Field(..., ge=1, description="Bikes the vehicle can carry")
    initial_station: str = Field(..., description="Station id where the vehicle starts")
    initial_load: int = Field(default=0, ge=0, description="Bikes on board at epoch 0")

    @model_validator(mode="after")
    def _load_fits(self) -> "Vehicle":
        if self.initial_load > self.capacity:
            raise ValueError(
                f"vehicle {self.id}: initial_load {self.initial_load} exceeds capacity {self.capacity}"
            )
        return self


class Trailer(BaseModel):
    """A crowdsourced bike trailer."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(..., description="Trailer identifier")
    capacity: int = Field(..., ge=1, description="Bikes per trip (typically 3-5)")
    max_distance_km: float = Field(..., gt=0.0, description="Longest pickup-to-dropoff distance")
    home_station: Optional[str] = Field(
        default=None, description="Station whose cluster this trailer serves"
    )


class DemandTensor(BaseModel):
    """Expected (or realized) customer requests F[s][s'][t]."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    F: list[list[list[float]]] = Field(..., description="Requests from s to s' starting at epoch t")

    @model_validator(mode="after")
    def _rectangular_non_negative(self) -> "DemandTensor":
        arr = _as_array(self.F, "demand.F", ndim=3)
        if arr.size and (arr < 0).any():
            raise ValueError("demand.F has negative entries")
        return self

    @cached_property
    def array(self) -> np.ndarray:
        return _as_array(self.F, "demand.F", ndim=3)

    @property
    def horizon(self) -> int:
        return int(self.array.shape[2]) if self.array.ndim == 3 else 0

    @classmethod
    def from_array(cls, values: np.ndarray) -> "DemandTensor":
        return cls(F=np.asarray(values, dtype=float).tolist())


class EconomicModel(BaseModel):
    """Revenue, routing cost, lost-demand value and trailer budget."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    R: list[list[list[float]]] = Field(..., description="Revenue per hired bike R[s][s'][t]")
    P: list[list[float]] = Field(..., description="Routing cost per traversal P[s][s']")
    xi: float = Field(..., ge=0.0, description="Value per unit of lost demand")
    budget: float = Field(..., ge=0.0, description="Trailer budget B")
    budget_per_epoch: bool = Field(
        default=False, description="Apply the budget per epoch instead of per horizon"
    )

    @model_validator(mode="after")
    def _non_negative(self) -> "EconomicModel":
        r = _as_array(self.R, "economics.R", ndim=3)
        p = _as_array(self.P, "economics.P", ndim=2)
        if r.size and (r < 0).any():
            raise ValueError("economics.R has negative entries")
        if p.size and (p < 0).any():
            raise ValueError("economics.P has negative entries")
        if p.size and np.any(np.diag(p) != 0):
            raise ValueError("economics.P must have a zero diagonal")
        return self


class DistanceMatrix(BaseModel):
    """Station-to-station distances in kilometers."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    D: list[list[float]] = Field(..., description="Distance D[s][s'] in km")

    @model_validator(mode="after")
    def _symmetric(self) -> "DistanceMatrix":
        d = _as_array(self.D, "distances.D", ndim=2)
        if d.size:
            if (d < 0).any():
                raise ValueError("distances.D has negative entries")
            if np.any(np.diag(d) != 0):
                raise ValueError("distances.D must have a zero diagonal")
            if not np.allclose(d, d.T, rtol=0.0, atol=1e-9):
                raise ValueError("distances.D must be symmetric")
        return self


class ProblemInstance(BaseModel):
    """One DRRPVT planning problem."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(default="instance", description="Label used in reports")
    stations: list[Station] = Field(..., description="Stations, in index order")
    vehicles: list[Vehicle] = Field(default_factory=list, description="Carrier vehicles")
    trailers: list[Trailer] = Field(default_factory=list, description="Bike trailers")
    demand: DemandTensor
    economics: EconomicModel
    distances: DistanceMatrix
    horizon: int = Field(..., ge=0, description="Epoch count T")
    epoch_minutes: int = Field(default=30, ge=1, description="Epoch duration")
    incoming: Optional[list[float]] = Field(
        default=None,
        description="Bikes in customer transit landing at each station during epoch 0",
    )

    @model_validator(mode="after")
    def _cross_references(self) -> "ProblemInstance":
        n = len(self.stations)
        ids = [s.id for s in self.stations]
        if len(set(ids)) != n:
            raise ValueError("station ids must be unique")
        known = set(ids)

        for v in self.vehicles:
            if v.initial_station not in known:
                raise ValueError(f"vehicle {v.id}: unknown initial_station {v.initial_station}")
        if len({v.id for v in self.vehicles}) != len(self.vehicles):
            raise ValueError("vehicle ids must be unique")
        for w in self.trailers:
            if w.home_station is not None and w.home_station not in known:
                raise ValueError(f"trailer {w.id}: unknown home_station {w.home_station}")
        if len({w.id for w in self.trailers}) != len(self.trailers):
            raise ValueError("trailer ids must be unique")

        tensors = (
            ("demand.F", self.demand.F, (n, n, self.horizon)),
            ("economics.R", self.economics.R, (n, n, self.horizon)),
            ("economics.P", self.economics.P, (n, n)),
            ("distances.D", self.distances.D, (n, n)),
        )
        for label, values, expected in tensors:
            if n == 0:
                if len(values) != 0:
                    raise ValueError(f"{label} must be empty for an empty station set")
                continue
            shape = tuple(_as_array(values, label, ndim=len(expected)).shape)
            if shape != expected:
                raise ValueError(f"{label} has shape {shape}, expected {expected}")
        if self.incoming is not None:
            if len(self.incoming) != n:
                raise ValueError(f"incoming has length {len(self.incoming)}, expected {n}")
            if any(x < 0 for x in self.incoming):
                raise ValueError("incoming has negative entries")
        return self

    # Index sets -------------------------------------------------------------

    @property
    def n_stations(self) -> int:
        return len(self.stations)

    @property
    def n_vehicles(self) -> int:
        return len(self.vehicles)

    @property
    def n_trailers(self) -> int:
        return len(self.trailers)

    @cached_property
    def station_index(self) -> dict[str, int]:
        return {s.id: i for i, s in enumerate(self.stations)}

    # Numpy views --------------------------------------------------------------

    @cached_property
    def F(self) -> np.ndarray:
        return _as_array(self.demand.F, "demand.F", ndim=3, n=self.n_stations, t=self.horizon)

    @cached_property
    def R(self) -> np.ndarray:
        return _as_array(self.economics.R, "economics.R", ndim=3, n=self.n_stations, t=self.horizon)

    @cached_property
    def P(self) -> np.ndarray:
        return _as_array(self.economics.P, "economics.P", ndim=2, n=self.n_stations)

    @cached_property
    def D(self) -> np.ndarray:
        return _as_array(self.distances.D, "distances.D", ndim=2, n=self.n_stations)

    @cached_property
    def station_capacity(self) -> np.ndarray:
        return np.array([s.capacity for s in self.stations], dtype=float)

    @cached_property
    def initial_bikes(self) -> np.ndarray:
        return np.array([s.initial_bikes for s in self.stations], dtype=float)

    @cached_property
    def incoming_bikes(self) -> np.ndarray:
        if self.incoming is None:
            return np.zeros(self.n_stations)
        return np.asarray(self.incoming, dtype=float)

    @cached_property
    def vehicle_capacity(self) -> np.ndarray:
        return np.array([v.capacity for v in self.vehicles], dtype=float)

    @cached_property
    def vehicle_start(self) -> np.ndarray:
        return np.array([self.station_index[v.initial_station] for v in self.vehicles], dtype=int)

    @cached_property
    def vehicle_load(self) -> np.ndarray:
        return np.array([v.initial_load for v in self.vehicles], dtype=float)

    @cached_property
    def trailer_capacity(self) -> np.ndarray:
        return np.array([w.capacity for w in self.trailers], dtype=float)

    @cached_property
    def trailer_range(self) -> np.ndarray:
        return np.array([w.max_distance_km for w in self.trailers], dtype=float)

    @cached_property
    def coordinates(self) -> np.ndarray:
        return np.array([[s.latitude, s.longitude] for s in self.stations], dtype=float).reshape(-1, 2)

    def total_bikes(self) -> float:
        """Bikes docked, on vehicles and landing during epoch 0."""
        return float(self.initial_bikes.sum() + self.vehicle_load.sum() + self.incoming_bikes.sum())

    def replace(self, **changes: Any) -> "ProblemInstance":
        """Return a validated copy with some fields replaced."""
        values = {name: getattr(self, name) for name in type(self).model_fields}
        values.update(changes)
        return type(self)(**values)


def _as_array(
    values: Any,
    label: str,
    ndim: int,
    n: Optional[int] = None,
    t: Optional[int] = None,
) -> np.ndarray:
    """Convert a nested list to a float array of the given rank."""
    try:
        arr = np.asarray(values, dtype=float)
    except ValueError as exc:
        raise ValueError(f"{label} is not rectangular") from exc
    if arr.ndim != ndim:
        if arr.size == 0:
            # [] encodes a tensor over zero stations
            return np.zeros((n or 0, n or 0) + ((t or 0,) if ndim == 3 else ()))
        raise ValueError(f"{label} must have {ndim} dimensions, found {arr.ndim}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{label} has non-finite entries")
    return arr
