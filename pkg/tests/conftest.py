"""Pytest fixtures for DRRPVT tests."""

from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pytest

from drrpvt.contracts.instance import (
    DemandTensor,
    DistanceMatrix,
    EconomicModel,
    ProblemInstance,
    Station,
    Trailer,
    Vehicle,
)
from drrpvt.ingest import SyntheticConfig, generate_synthetic


def _make_instance(
    capacities: Sequence[int] = (4, 4),
    bikes: Sequence[int] = (3, 0),
    demand: Optional[np.ndarray] = None,
    horizon: int = 2,
    revenue: float = 2.0,
    n_vehicles: int = 1,
    vehicle_capacity: int = 2,
    n_trailers: int = 1,
    trailer_capacity: int = 2,
    trailer_range: float = 2.0,
    distance: float = 1.0,
    cost: float = 1.0,
    xi: float = 1.0,
    budget: float = 10.0,
    budget_per_epoch: bool = False,
    incoming: Optional[Sequence[float]] = None,
    name: str = "tiny",
) -> ProblemInstance:
    """Stations on a line ``distance`` km apart; vehicles start at station 0.

    Default demand is one request 0 -> 1 in epoch 0 and one 1 -> 0 in epoch 1.
    """
    S = len(capacities)
    if demand is None:
        demand = np.zeros((S, S, horizon))
        if S > 1:
            demand[0, 1, 0] = 1.0
            if horizon > 1:
                demand[1, 0, 1] = 1.0
    gaps = np.abs(np.subtract.outer(np.arange(S), np.arange(S))).astype(float)
    stations = [
        Station(id=f"s{i}", latitude=42.0, longitude=-71.0 + 0.012 * i, capacity=c, initial_bikes=b)
        for i, (c, b) in enumerate(zip(capacities, bikes))
    ]
    return ProblemInstance(
        name=name,
        stations=stations,
        vehicles=[Vehicle(id=f"v{v}", capacity=vehicle_capacity, initial_station="s0") for v in range(n_vehicles)],
        trailers=[
            Trailer(id=f"w{w}", capacity=trailer_capacity, max_distance_km=trailer_range) for w in range(n_trailers)
        ],
        demand=DemandTensor.from_array(demand),
        economics=EconomicModel(
            R=np.full((S, S, horizon), revenue).tolist(),
            P=(cost * gaps).tolist(),
            xi=xi,
            budget=budget,
            budget_per_epoch=budget_per_epoch,
        ),
        distances=DistanceMatrix(D=(distance * gaps).tolist()),
        horizon=horizon,
        incoming=None if incoming is None else list(incoming),
    )


@pytest.fixture
def make_instance():
    """Factory for small hand-sized instances."""
    return _make_instance


@pytest.fixture
def tiny_instance() -> ProblemInstance:
    """2 stations, 1 vehicle, 1 trailer, 2 epochs."""
    return _make_instance()


@pytest.fixture
def zero_demand_instance() -> ProblemInstance:
    """The tiny instance without any customer requests."""
    return _make_instance(demand=np.zeros((2, 2, 2)), name="idle")


@pytest.fixture
def small_synthetic() -> ProblemInstance:
    """4 stations, 1 vehicle, 1 trailer, 2 epochs, small capacities."""
    return generate_synthetic(
        SyntheticConfig(
            n_stations=4,
            n_vehicles=1,
            n_trailers=1,
            horizon=2,
            extent_km=2.0,
            capacity_range=(3, 4),
            vehicle_capacity=2,
            trailer_capacity_range=(2, 2),
            demand_intensity=1.0,
            budget=5.0,
            seed=3,
        )
    )


@pytest.fixture
def output_dir(tmp_path: Path) -> Path:
    """Scratch artifact directory."""
    path = tmp_path / "runs"
    path.mkdir()
    return path
