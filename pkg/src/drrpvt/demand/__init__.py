"""Empirical demand fitting and scenario sampling."""

from drrpvt.demand.empirical import (
    TRIP_COLUMNS,
    DemandModel,
    FitDiagnostics,
    fit_empirical,
    load_column_mapping,
    read_trips,
    transition_fraction,
)
from drrpvt.demand.sampling import SamplingMode, sample_scenario, sample_scenarios

__all__ = [
    "TRIP_COLUMNS",
    "DemandModel",
    "FitDiagnostics",
    "SamplingMode",
    "fit_empirical",
    "load_column_mapping",
    "read_trips",
    "sample_scenario",
    "sample_scenarios",
    "transition_fraction",
]
