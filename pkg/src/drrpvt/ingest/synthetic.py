"""Parametric synthetic instances and instance assembly from ingested data."""

from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from drrpvt.clustering.geo import pairwise_haversine
from drrpvt.contracts.instance import (
    DemandTensor,
    DistanceMatrix,
    EconomicModel,
    ProblemInstance,
    Station,
    Trailer,
    Vehicle,
)
from drrpvt.contracts.records import StationRecord
from drrpvt.demand.empirical import DemandModel
from drrpvt.errors import ConfigError
from drrpvt.util.logging import get_logger

logger = get_logger("ingest.synthetic")

KM_PER_DEGREE = 111.195


class SyntheticConfig(BaseModel):
    """Generator parameters. Defaults give a 60-station city with 2 vehicles and 7 trailers."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_stations: int = Field(default=60, ge=0)
    n_vehicles: int = Field(default=2, ge=0)
    n_trailers: int = Field(default=7, ge=0)
    horizon: int = Field(default=12, ge=1, description="Epochs")
    epoch_minutes: int = Field(default=30, ge=1)
    demand_intensity: float = Field(default=2.0, ge=0.0, description="Mean departures per station and epoch")
    commute_share: float = Field(default=0.4, ge=0.0, le=1.0, description="Share of trips heading to the center")
    extent_km: float = Field(default=6.0, gt=0.0, description="Side of the square stations are placed in")
    center_latitude: float = Field(default=42.36, ge=-80.0, le=80.0)
    center_longitude: float = Field(default=-71.06, ge=-180.0, le=180.0)
    capacity_range: tuple[int, int] = Field(default=(15, 40))
    fill_ratio: float = Field(default=0.5, ge=0.0, le=1.0)
    vehicle_capacity: int = Field(default=30, ge=1)
    trailer_capacity_range: tuple[int, int] = Field(default=(3, 5))
    trailer_range_km: float = Field(default=3.0, gt=0.0)
    fare_base: float = Field(default=1.0, ge=0.0, description="Revenue per hired bike")
    fare_per_km: float = Field(default=0.5, ge=0.0)
    cost_per_km: float = Field(default=0.8, ge=0.0, description="Vehicle routing cost per km")
    xi: float = Field(default=1.0, ge=0.0, description="Value per unit of lost demand")
    budget: float = Field(default=20.0, ge=0.0)
    budget_per_epoch: bool = False
    seed: int = 0

    @model_validator(mode="after")
    def _ranges(self) -> "SyntheticConfig":
        for label, (lo, hi) in (("capacity_range", self.capacity_range), ("trailer_capacity_range", self.trailer_capacity_range)):
            if not 0 <= lo <= hi:
                raise ValueError(f"{label} must satisfy 0 <= low <= high, got {(lo, hi)}")
        if self.trailer_capacity_range[0] < 1:
            raise ValueError("trailers carry at least one bike")
        return self


def _economics(D: np.ndarray, horizon: int, config: SyntheticConfig, budget: Optional[float] = None) -> EconomicModel:
    """Fares and routing costs proportional to distance."""
    R = np.repeat((config.fare_base + config.fare_per_km * D)[:, :, None], horizon, axis=2)
    return EconomicModel(
        R=np.round(R, 6).tolist(),
        P=np.round(config.cost_per_km * D, 6).tolist(),
        xi=config.xi,
        budget=config.budget if budget is None else budget,
        budget_per_epoch=config.budget_per_epoch,
    )


def _fleet(station_ids: Sequence[str], config: SyntheticConfig, rng: np.random.Generator) -> tuple[list[Vehicle], list[Trailer]]:
    S = len(station_ids)
    starts = rng.choice(S, size=config.n_vehicles, replace=config.n_vehicles > S)
    vehicles = [
        Vehicle(id=f"v{v}", capacity=config.vehicle_capacity, initial_station=station_ids[int(s)])
        for v, s in enumerate(starts)
    ]
    lo, hi = config.trailer_capacity_range
    trailers = [
        Trailer(id=f"w{w}", capacity=int(c), max_distance_km=config.trailer_range_km)
        for w, c in enumerate(rng.integers(lo, hi + 1, size=config.n_trailers))
    ]
    return vehicles, trailers


def _distances(coordinates: np.ndarray) -> np.ndarray:
    D = np.round(pairwise_haversine(coordinates), 6)
    D = np.minimum(D, D.T)
    np.fill_diagonal(D, 0.0)
    return D


def commute_demand(D: np.ndarray, horizon: int, config: SyntheticConfig, center: int) -> np.ndarray:
    """Morning-commute OD means: gravity flows plus a share toward ``center``, peaking mid-horizon."""
    S = D.shape[0]
    scale = max(config.extent_km / 3.0, 1e-9)
    gravity = np.exp(-D / scale)
    np.fill_diagonal(gravity, 0.0)
    rows = gravity.sum(axis=1, keepdims=True)
    weights = np.where(rows > 0, gravity / np.where(rows > 0, rows, 1.0), 0.0) * (1.0 - config.commute_share)
    toward = np.zeros((S, S))
    toward[:, center] = config.commute_share
    toward[center, center] = 0.0
    weights += toward
    profile = 1.0 + np.sin(np.pi * (np.arange(horizon) + 0.5) / horizon)
    F = config.demand_intensity * weights[:, :, None] * profile[None, None, :]
    return np.round(F, 6)


def generate_synthetic(config: SyntheticConfig, name: Optional[str] = None) -> ProblemInstance:
    """Random city: uniform station placement, half-full docks, commute demand.

    Deterministic for a given config.
    """
    if config.n_stations < 1:
        raise ConfigError("synthetic instance needs at least one station", n_stations=config.n_stations)
    rng = np.random.default_rng(config.seed)
    S, T = config.n_stations, config.horizon

    xy = rng.uniform(0.0, config.extent_km, size=(S, 2)) - config.extent_km / 2.0
    lat = config.center_latitude + xy[:, 1] / KM_PER_DEGREE
    lon = config.center_longitude + xy[:, 0] / (KM_PER_DEGREE * np.cos(np.radians(config.center_latitude)))
    coordinates = np.round(np.column_stack([lat, lon]), 6)

    lo, hi = config.capacity_range
    capacity = rng.integers(lo, hi + 1, size=S)
    bikes = np.rint(capacity * config.fill_ratio).astype(int)
    stations = [
        Station(
            id=f"s{i}",
            latitude=float(coordinates[i, 0]),
            longitude=float(coordinates[i, 1]),
            capacity=int(capacity[i]),
            initial_bikes=int(bikes[i]),
        )
        for i in range(S)
    ]
    D = _distances(coordinates)
    center = int(np.argmin(np.hypot(xy[:, 0], xy[:, 1])))
    vehicles, trailers = _fleet([s.id for s in stations], config, rng)

    instance = ProblemInstance(
        name=name or f"synthetic-{S}s-seed{config.seed}",
        stations=stations,
        vehicles=vehicles,
        trailers=trailers,
        demand=DemandTensor.from_array(commute_demand(D, T, config, center)),
        economics=_economics(D, T, config),
        distances=DistanceMatrix(D=D.tolist()),
        horizon=T,
        epoch_minutes=config.epoch_minutes,
    )
    logger.info(
        f"generated '{instance.name}': {S} stations, {len(vehicles)} vehicles, {len(trailers)} trailers, {T} epochs"
    )
    return instance


def build_instance(
    stations: Sequence[StationRecord],
    demand: DemandModel,
    config: Optional[SyntheticConfig] = None,
    name: str = "ingested",
) -> ProblemInstance:
    """Instance from station records and a fitted demand model.

    Docks start at ``config.fill_ratio``; fleet and economics follow the
    synthetic rules in ``config``.
    """
    config = config or SyntheticConfig()
    if not stations:
        raise ConfigError("cannot build an instance without stations")
    ids = [s.id for s in stations]
    if demand.station_ids and list(demand.station_ids) != ids:
        raise ConfigError("demand model was fitted on a different station list", stations=len(ids))
    rng = np.random.default_rng(config.seed)
    coordinates = np.array([[s.latitude, s.longitude] for s in stations], dtype=float)
    D = _distances(coordinates)
    T = demand.horizon
    vehicles, trailers = _fleet(ids, config, rng)
    return ProblemInstance(
        name=name,
        stations=[
            Station(
                id=s.id,
                latitude=s.latitude,
                longitude=s.longitude,
                capacity=s.capacity,
                initial_bikes=int(round(s.capacity * config.fill_ratio)),
            )
            for s in stations
        ],
        vehicles=vehicles,
        trailers=trailers,
        demand=demand.F,
        economics=_economics(D, T, config),
        distances=DistanceMatrix(D=D.tolist()),
        horizon=T,
        epoch_minutes=demand.epoch_minutes,
    )
