"""Executable single-epoch plans."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from drrpvt.contracts.solution import Solution


class VehicleAction(BaseModel):
    """What one carrier vehicle does in an epoch.

    The vehicle operates at ``station`` and starts the next epoch at
    ``destination`` (equal to ``station`` when it stays).
    """

    model_config = ConfigDict(frozen=True)

    vehicle: int = Field(..., ge=0)
    station: int = Field(..., ge=0)
    destination: int = Field(..., ge=0)
    pickup: int = Field(default=0, ge=0)
    dropoff: int = Field(default=0, ge=0)

    @property
    def moves(self) -> bool:
        return self.destination != self.station


class TrailerAction(BaseModel):
    """A trailer task: carry ``quantity`` bikes from origin to destination."""

    model_config = ConfigDict(frozen=True)

    trailer: int = Field(..., ge=0)
    origin: int = Field(..., ge=0)
    destination: int = Field(..., ge=0)
    quantity: int = Field(..., ge=0)
    value: float = Field(default=0.0, ge=0.0, description="Task value P^ the plan priced it at")


class EpochPlan(BaseModel):
    """Vehicle and trailer actions for one epoch, indexed by station position."""

    model_config = ConfigDict(frozen=True)

    epoch: int = Field(..., ge=0)
    vehicles: list[VehicleAction] = Field(default_factory=list)
    trailers: list[TrailerAction] = Field(default_factory=list)

    @classmethod
    def idle(cls, epoch: int, positions: list[int]) -> "EpochPlan":
        """Every vehicle stays where it is; no trailer tasks."""
        return cls(
            epoch=epoch,
            vehicles=[VehicleAction(vehicle=v, station=p, destination=p) for v, p in enumerate(positions)],
        )

    @classmethod
    def from_solution(cls, solution: Solution, t: int = 0, epoch: int | None = None) -> "EpochPlan":
        """Slice epoch ``t`` of a solution into actions."""
        S, V, W, T = solution.shape
        vehicles = []
        for v in range(V):
            departs = np.argwhere(solution.z[:, :, v, t] > 0.5)
            if departs.size:
                station, destination = (int(i) for i in departs[0])
            else:
                idle = np.flatnonzero(solution.sigma[v, :, t] > 0.5)
                station = destination = int(idle[0]) if idle.size else 0
            vehicles.append(
                VehicleAction(
                    vehicle=v,
                    station=station,
                    destination=destination,
                    pickup=int(round(solution.y_plus[station, v, t])),
                    dropoff=int(round(solution.y_minus[station, v, t])),
                )
            )
        trailers = []
        for w in range(W):
            tasks = np.argwhere(solution.b[:, :, w, t] > 0.5)
            if not tasks.size:
                continue
            origin, destination = (int(i) for i in tasks[0])
            quantity = int(round(solution.a_plus[origin, w, t]))
            if quantity > 0:
                trailers.append(
                    TrailerAction(
                        trailer=w,
                        origin=origin,
                        destination=destination,
                        quantity=quantity,
                        value=float(solution.task_values[origin, destination, t]),
                    )
                )
        return cls(epoch=t if epoch is None else epoch, vehicles=vehicles, trailers=trailers)

    @property
    def bikes_moved(self) -> int:
        return sum(a.pickup for a in self.vehicles) + sum(a.quantity for a in self.trailers)
