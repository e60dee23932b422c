"""Per-epoch accounting, simulation reports and policy comparison ratios."""

from typing import Any, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field


class EpochMetrics(BaseModel):
    """What happened during one simulated epoch."""

    model_config = ConfigDict(frozen=True)

    epoch: int = Field(..., ge=0)
    demand: int = Field(default=0, ge=0, description="Realized departures requested")
    served: int = Field(default=0, ge=0)
    lost: int = Field(default=0, ge=0, description="Departures refused at an empty station")
    revenue: float = 0.0
    routing_cost: float = 0.0
    trailer_payment: float = Field(default=0.0, ge=0.0)
    bikes_moved: int = Field(default=0, ge=0, description="Bikes carried by vehicles and trailers")
    redirected: int = Field(default=0, ge=0, description="Returns landed away from a full destination")
    stranded: int = Field(default=0, ge=0, description="Returns left in transit for lack of docks")
    tasks_offered: int = Field(default=0, ge=0)
    tasks_allocated: int = Field(default=0, ge=0)
    plan_seconds: float = Field(default=0.0, ge=0.0)

    @property
    def profit(self) -> float:
        return self.revenue - self.routing_cost - self.trailer_payment


class ServiceRecord(BaseModel):
    """Realized departures against served departures at one station and epoch."""

    model_config = ConfigDict(frozen=True)

    station: str
    epoch: int
    actual: int
    served: int


class SimulationReport(BaseModel):
    """Outcome of running one policy over the horizon."""

    model_config = ConfigDict(frozen=True)

    policy: str
    instance: str
    seed: int
    epochs: list[EpochMetrics] = Field(default_factory=list)
    service: list[ServiceRecord] = Field(default_factory=list)

    @property
    def revenue(self) -> float:
        return sum(e.revenue for e in self.epochs)

    @property
    def routing_cost(self) -> float:
        return sum(e.routing_cost for e in self.epochs)

    @property
    def trailer_payments(self) -> float:
        return sum(e.trailer_payment for e in self.epochs)

    @property
    def profit(self) -> float:
        return self.revenue - self.routing_cost - self.trailer_payments

    @property
    def served(self) -> int:
        return sum(e.served for e in self.epochs)

    @property
    def lost(self) -> int:
        return sum(e.lost for e in self.epochs)

    @property
    def plan_seconds(self) -> float:
        return sum(e.plan_seconds for e in self.epochs)

    def summary(self) -> dict[str, Any]:
        return {
            "policy": self.policy,
            "instance": self.instance,
            "seed": self.seed,
            "epochs": len(self.epochs),
            "revenue": self.revenue,
            "routing_cost": self.routing_cost,
            "trailer_payments": self.trailer_payments,
            "profit": self.profit,
            "served": self.served,
            "lost_demand": self.lost,
            "bikes_moved": sum(e.bikes_moved for e in self.epochs),
            "redirected": sum(e.redirected for e in self.epochs),
            "plan_seconds": self.plan_seconds,
        }

    def epoch_frame(self) -> pd.DataFrame:
        columns = list(EpochMetrics.model_fields) + ["profit"]
        rows = [{**e.model_dump(), "profit": e.profit} for e in self.epochs]
        return pd.DataFrame(rows, columns=columns)

    def scatter_frame(self) -> pd.DataFrame:
        """actual, served, station, epoch: demand against supply per station."""
        rows = [r.model_dump() for r in self.service]
        return pd.DataFrame(rows, columns=["actual", "served", "station", "epoch"])


class ComparisonMetrics(BaseModel):
    """Profit gains and lost-demand changes of the joint policy over each baseline.

    A ratio is ``None`` when its baseline is zero. Lost-demand ratios are
    negative when the joint policy loses fewer customers; the ``*_reduction``
    fields carry the magnitude.
    """

    model_config = ConfigDict(frozen=True)

    gain_vehicles: Optional[float] = None
    gain_trailers: Optional[float] = None
    lost_vehicles: Optional[float] = None
    lost_trailers: Optional[float] = None

    @property
    def lost_vehicles_reduction(self) -> Optional[float]:
        return None if self.lost_vehicles is None else abs(self.lost_vehicles)

    @property
    def lost_trailers_reduction(self) -> Optional[float]:
        return None if self.lost_trailers is None else abs(self.lost_trailers)

    def as_dict(self) -> dict[str, Optional[float]]:
        return {
            "G_v": self.gain_vehicles,
            "G_t": self.gain_trailers,
            "L_v": self.lost_vehicles,
            "L_t": self.lost_trailers,
            "L_v_reduction": self.lost_vehicles_reduction,
            "L_t_reduction": self.lost_trailers_reduction,
        }


def _relative(joint: float, baseline: float) -> Optional[float]:
    if baseline == 0:
        return None
    return (joint - baseline) / baseline


def compare_metrics(
    U_vt: float,
    U_v: float,
    U_t: float,
    E_vt: float,
    E_v: float,
    E_t: float,
) -> ComparisonMetrics:
    """Relative profit gains and lost-demand changes.

    Args:
        U_vt, U_v, U_t: Profit of the joint, vehicle-only and trailer-only policies
        E_vt, E_v, E_t: Lost demand of the same policies

    Returns:
        G_v = (U_vt - U_v) / U_v and likewise G_t, L_v, L_t, as fractions
    """
    return ComparisonMetrics(
        gain_vehicles=_relative(U_vt, U_v),
        gain_trailers=_relative(U_vt, U_t),
        lost_vehicles=_relative(E_vt, E_v),
        lost_trailers=_relative(E_vt, E_t),
    )


def comparison_frame(reports: dict[str, SimulationReport]) -> pd.DataFrame:
    """One summary row per policy."""
    return pd.DataFrame([r.summary() for r in reports.values()])
