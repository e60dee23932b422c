"""Empirical origin-destination demand from historical trips."""

import json
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from drrpvt.contracts.envelope import Message, warn
from drrpvt.contracts.instance import DemandTensor, ProblemInstance
from drrpvt.contracts.records import TripRecord
from drrpvt.errors import ConfigError, SchemaError
from drrpvt.model.objective import transition_fractions
from drrpvt.util.logging import get_logger

logger = get_logger("demand")

TRIP_COLUMNS = ("start_time", "end_time", "start_station", "end_station")


class FitDiagnostics(BaseModel):
    """Counts of what happened to each trip during fitting."""

    trips_read: int = 0
    retained: int = 0
    outside_window: int = 0
    unknown_station: int = 0
    days: int = 0


class DemandModel(BaseModel):
    """Mean trips per (origin, destination, epoch) over the observed days.

    ``daily`` keeps the per-day counts so whole days can be resampled.
    """

    model_config = ConfigDict(frozen=True)

    F: DemandTensor
    epoch_minutes: int = Field(default=30, ge=1)
    day_window: tuple[int, int] = Field(default=(0, 24), description="(start hour, end hour)")
    station_ids: list[str] = Field(default_factory=list)
    daily: list[list[list[list[int]]]] = Field(default_factory=list, description="Counts per day [d][s][s'][t]")
    diagnostics: FitDiagnostics = Field(default_factory=FitDiagnostics)

    @property
    def horizon(self) -> int:
        return self.F.horizon

    @property
    def n_days(self) -> int:
        return len(self.daily)

    @classmethod
    def from_instance(cls, instance: ProblemInstance) -> "DemandModel":
        """Use an instance's demand tensor as the expected demand."""
        return cls(
            F=instance.demand,
            epoch_minutes=instance.epoch_minutes,
            station_ids=[s.id for s in instance.stations],
        )


def _epoch_count(epoch_minutes: int, day_window: tuple[int, int]) -> int:
    start, end = day_window
    if not 0 <= start < end <= 24:
        raise ConfigError(f"invalid day window {day_window}", day_window=list(day_window))
    span = (end - start) * 60
    if epoch_minutes <= 0 or span % epoch_minutes:
        raise ConfigError(
            f"epoch length {epoch_minutes} min does not divide the {span} min window",
            epoch_minutes=epoch_minutes,
        )
    return span // epoch_minutes


def fit_empirical(
    trips: Sequence[TripRecord],
    station_ids: Sequence[str],
    epoch_minutes: int = 30,
    day_window: tuple[int, int] = (0, 24),
) -> DemandModel:
    """Bin trips by departure epoch and average over the observed days.

    Trips outside the window or between unknown stations are dropped and
    counted in the diagnostics. Days are the distinct departure dates in
    the input.
    """
    if not station_ids:
        raise ConfigError("cannot fit demand over an empty station set")
    T = _epoch_count(epoch_minutes, day_window)
    index = {sid: i for i, sid in enumerate(station_ids)}
    S = len(station_ids)
    diagnostics = FitDiagnostics(trips_read=len(trips))

    if not trips:
        return DemandModel(
            F=DemandTensor.from_array(np.zeros((S, S, T))),
            epoch_minutes=epoch_minutes,
            day_window=day_window,
            station_ids=list(station_ids),
            diagnostics=diagnostics,
        )

    df = pd.DataFrame([t.model_dump() for t in trips])
    df["date"] = df["start_time"].map(lambda ts: ts.date())
    days = sorted(df["date"].unique())
    df["day"] = df["date"].map({d: i for i, d in enumerate(days)})

    known = df["start_station"].isin(index) & df["end_station"].isin(index)
    minutes = df["start_time"].map(lambda ts: ts.hour * 60 + ts.minute + ts.second / 60.0) - day_window[0] * 60
    epoch = np.floor(minutes / epoch_minutes).astype(int)
    inside = (epoch >= 0) & (epoch < T)

    diagnostics.unknown_station = int((~known).sum())
    diagnostics.outside_window = int((known & ~inside).sum())
    kept = df[known & inside].assign(epoch=epoch[known & inside])
    diagnostics.retained = len(kept)
    diagnostics.days = len(days)

    daily = np.zeros((len(days), S, S, T), dtype=int)
    if len(kept):
        counts = kept.groupby(["day", "start_station", "end_station", "epoch"]).size()
        for (day, origin, destination, t), n in counts.items():
            daily[int(day), index[origin], index[destination], int(t)] = int(n)
    F = daily.mean(axis=0)

    logger.info(
        f"fitted demand from {diagnostics.retained}/{diagnostics.trips_read} trips over {len(days)} day(s); "
        f"{diagnostics.outside_window} outside window, {diagnostics.unknown_station} unknown station"
    )
    return DemandModel(
        F=DemandTensor.from_array(F),
        epoch_minutes=epoch_minutes,
        day_window=day_window,
        station_ids=list(station_ids),
        daily=daily.tolist(),
        diagnostics=diagnostics,
    )


def transition_fraction(F: np.ndarray, s: int, s2: int, t: int) -> float:
    """Share of departures from s in epoch t heading to s2 (0 for an empty row)."""
    return float(transition_fractions(np.asarray(F, dtype=float)[:, :, t:t + 1])[s, s2, 0])


def load_column_mapping(path: Optional[Path]) -> dict[str, str]:
    """Read a JSON object mapping source column names to canonical ones."""
    if path is None:
        return {}
    with open(path) as f:
        mapping = json.load(f)
    if not isinstance(mapping, dict) or not all(isinstance(k, str) and isinstance(v, str) for k, v in mapping.items()):
        raise ConfigError(f"column mapping {path} must be a JSON object of strings", path=str(path))
    return mapping


def read_trips(path: Path, mapping: Optional[dict[str, str]] = None) -> tuple[list[TripRecord], list[Message]]:
    """Parse a trip CSV; rows that fail validation become diagnostics."""
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    if mapping:
        df = df.rename(columns=mapping)
    for column in TRIP_COLUMNS:
        if column not in df.columns:
            raise SchemaError(column, str(path))

    records: list[TripRecord] = []
    diagnostics: list[Message] = []
    for row_number, row in enumerate(df[list(TRIP_COLUMNS)].to_dict(orient="records"), start=2):
        try:
            records.append(TripRecord(**{k: v.strip() for k, v in row.items()}))
        except ValidationError as e:
            diagnostics.append(
                warn(
                    "invalid_row",
                    f"trip row {row_number} rejected",
                    row=row_number,
                    errors=[err["msg"] for err in e.errors()],
                )
            )
    logger.info(f"read {len(records)} trips from {path} ({len(diagnostics)} rejected)")
    return records, diagnostics
