"""System state carried between simulated epochs."""

from pydantic import BaseModel, ConfigDict, Field, model_validator

from drrpvt.contracts.instance import ProblemInstance


class TransitBatch(BaseModel):
    """Bikes ridden by customers, landing at ``destination`` during ``arrival_epoch``."""

    model_config = ConfigDict(frozen=True)

    destination: int = Field(..., ge=0)
    arrival_epoch: int = Field(..., ge=0)
    count: int = Field(..., ge=0)


class SystemState(BaseModel):
    """Inventories, fleet and customer transit at the start of an epoch."""

    model_config = ConfigDict(frozen=True)

    epoch: int = Field(default=0, ge=0)
    station_bikes: list[int] = Field(default_factory=list, description="Docked bikes per station")
    vehicle_loads: list[int] = Field(default_factory=list, description="Bikes on each vehicle")
    vehicle_positions: list[int] = Field(default_factory=list, description="Station index of each vehicle")
    in_transit: list[TransitBatch] = Field(default_factory=list)

    @model_validator(mode="after")
    def _fleet_lengths(self) -> "SystemState":
        if len(self.vehicle_loads) != len(self.vehicle_positions):
            raise ValueError(
                f"{len(self.vehicle_loads)} vehicle loads for {len(self.vehicle_positions)} vehicle positions"
            )
        if any(b < 0 for b in self.station_bikes) or any(d < 0 for d in self.vehicle_loads):
            raise ValueError("negative inventory")
        return self

    @classmethod
    def initial(cls, instance: ProblemInstance) -> "SystemState":
        """State at epoch 0; the instance's incoming bikes land during epoch 0."""
        in_transit = [
            TransitBatch(destination=s, arrival_epoch=0, count=int(round(n)))
            for s, n in enumerate(instance.incoming_bikes)
            if round(n) > 0
        ]
        return cls(
            epoch=0,
            station_bikes=[s.initial_bikes for s in instance.stations],
            vehicle_loads=[v.initial_load for v in instance.vehicles],
            vehicle_positions=[int(p) for p in instance.vehicle_start],
            in_transit=in_transit,
        )

    @property
    def bikes_in_transit(self) -> int:
        return sum(b.count for b in self.in_transit)

    def total_bikes(self) -> int:
        """Bikes docked, on vehicles and in customer transit."""
        return sum(self.station_bikes) + sum(self.vehicle_loads) + self.bikes_in_transit

    def arrivals(self, epoch: int) -> list[int]:
        """Bikes due to land at each station during ``epoch``."""
        due = [0] * len(self.station_bikes)
        for batch in self.in_transit:
            if batch.arrival_epoch == epoch:
                due[batch.destination] += batch.count
        return due
