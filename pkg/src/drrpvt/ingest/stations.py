"""Station metadata CSV reader."""

from pathlib import Path
from typing import Optional

import pandas as pd
from pydantic import ValidationError

from drrpvt.contracts.envelope import Message, warn
from drrpvt.contracts.records import StationRecord
from drrpvt.errors import SchemaError
from drrpvt.util.logging import get_logger

logger = get_logger("ingest")

STATION_COLUMNS = ("id", "latitude", "longitude", "capacity")


def read_stations(path: Path, mapping: Optional[dict[str, str]] = None) -> tuple[list[StationRecord], list[Message]]:
    """Parse a station CSV (``id,name,latitude,longitude,capacity``).

    ``mapping`` renames source columns to these names first. Rows that fail
    validation are reported as diagnostics with their 1-based file line.
    Duplicate ids keep the first row.
    """
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    if mapping:
        df = df.rename(columns=mapping)
    for column in STATION_COLUMNS:
        if column not in df.columns:
            raise SchemaError(column, str(path))
    if "name" not in df.columns:
        df["name"] = ""

    records: list[StationRecord] = []
    diagnostics: list[Message] = []
    seen: set[str] = set()
    for row_number, row in enumerate(df[["id", "name", *STATION_COLUMNS[1:]]].to_dict(orient="records"), start=2):
        values = {k: v.strip() for k, v in row.items()}
        values["name"] = values["name"] or None
        try:
            record = StationRecord(**values)
        except ValidationError as e:
            diagnostics.append(
                warn(
                    "invalid_row",
                    f"station row {row_number} rejected",
                    row=row_number,
                    errors=[err["msg"] for err in e.errors()],
                )
            )
            continue
        if record.id in seen:
            diagnostics.append(
                warn("duplicate_station", f"station row {row_number} repeats id {record.id}", row=row_number)
            )
            continue
        seen.add(record.id)
        records.append(record)

    logger.info(f"read {len(records)} stations from {path} ({len(diagnostics)} rejected)")
    return records, diagnostics


def stations_frame(records: list[StationRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump() for r in records], columns=["id", "name", "latitude", "longitude", "capacity"])
