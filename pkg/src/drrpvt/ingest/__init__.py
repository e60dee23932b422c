"""Station and trip ingestion, synthetic instances and the JSON interchange format."""

from drrpvt.ingest.instance_io import (
    INSTANCE_SCHEMA,
    SOLUTION_SCHEMA,
    instance_from_json,
    instance_to_json,
    load_instance,
    load_solution,
    save_instance,
    save_solution,
    solution_to_json,
)
from drrpvt.ingest.stations import STATION_COLUMNS, read_stations, stations_frame
from drrpvt.ingest.synthetic import SyntheticConfig, build_instance, commute_demand, generate_synthetic

__all__ = [
    "INSTANCE_SCHEMA",
    "SOLUTION_SCHEMA",
    "STATION_COLUMNS",
    "SyntheticConfig",
    "build_instance",
    "commute_demand",
    "generate_synthetic",
    "instance_from_json",
    "instance_to_json",
    "load_instance",
    "load_solution",
    "read_stations",
    "save_instance",
    "save_solution",
    "solution_to_json",
    "stations_frame",
]
