"""Input record contracts for station metadata and historical trips."""

from datetime import datetime
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class StationRecord(BaseModel):
    """One row of a station metadata CSV."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1, description="Station identifier")
    name: Optional[str] = Field(default=None, description="Display name")
    latitude: float = Field(..., ge=-90.0, le=90.0, description="Degrees")
    longitude: float = Field(..., ge=-180.0, le=180.0, description="Degrees")
    capacity: int = Field(..., ge=0, description="Dock count")


class TripRecord(BaseModel):
    """One historical customer trip."""

    model_config = ConfigDict(frozen=True)

    start_time: datetime = Field(..., description="Departure timestamp")
    end_time: datetime = Field(..., description="Return timestamp")
    start_station: str = Field(..., description="Origin station id")
    end_station: str = Field(..., description="Destination station id")

    @model_validator(mode="after")
    def _ordered(self) -> "TripRecord":
        if self.end_time < self.start_time:
            raise ValueError("end_time precedes start_time")
        return self
