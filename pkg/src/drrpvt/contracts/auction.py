"""Trailer task auction contracts."""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class TrailerTask(BaseModel):
    """A repositioning job offered to trailer users."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., description="Task identifier")
    origin: str = Field(..., description="Pickup station id")
    destination: str = Field(..., description="Dropoff station id")
    epoch: int = Field(..., ge=0, description="Epoch the task runs in")
    quantity: int = Field(..., ge=1, description="Bikes moved")
    value: float = Field(..., ge=0.0, description="Task value P^")
    trailer: Optional[str] = Field(default=None, description="Trailer the plan assigned")


class Bid(BaseModel):
    """A sealed bid from one user on one task."""

    model_config = ConfigDict(frozen=True)

    bidder: str = Field(..., description="User id")
    task: str = Field(..., description="Task id")
    amount: float = Field(..., ge=0.0, description="Asking price")


class Award(BaseModel):
    """Outcome for a single task."""

    model_config = ConfigDict(frozen=True)

    task: str
    winner: Optional[str] = Field(default=None, description="Winning bidder, None if unallocated")
    payment: float = Field(default=0.0, ge=0.0)
    reason: Optional[str] = Field(default=None, description="Why the task went unallocated")


class Allocation(BaseModel):
    """Result of one auction round."""

    model_config = ConfigDict(frozen=True)

    awards: list[Award] = Field(default_factory=list, description="One entry per task, in processing order")
    total_paid: float = Field(default=0.0, ge=0.0)
    budget: float = Field(..., ge=0.0)

    def winner_of(self, task_id: str) -> Optional[str]:
        for award in self.awards:
            if award.task == task_id:
                return award.winner
        return None

    @property
    def allocated(self) -> list[Award]:
        return [a for a in self.awards if a.winner is not None]
