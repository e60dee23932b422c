"""Rolling-horizon simulation of repositioning policies."""

from drrpvt.simulator.engine import nearest_free_station, repair_plan, serve_departures, step, validate_plan
from drrpvt.simulator.metrics import (
    ComparisonMetrics,
    EpochMetrics,
    ServiceRecord,
    SimulationReport,
    compare_metrics,
    comparison_frame,
)
from drrpvt.simulator.policies import Planner, Policy, PolicyPlanner, landed_arrivals, planning_window
from drrpvt.simulator.runner import realized_demand, run_comparison, run_policy
from drrpvt.simulator.state import SystemState, TransitBatch

__all__ = [
    "ComparisonMetrics",
    "EpochMetrics",
    "Planner",
    "Policy",
    "PolicyPlanner",
    "ServiceRecord",
    "SimulationReport",
    "SystemState",
    "TransitBatch",
    "compare_metrics",
    "comparison_frame",
    "landed_arrivals",
    "nearest_free_station",
    "planning_window",
    "realized_demand",
    "repair_plan",
    "run_comparison",
    "run_policy",
    "serve_departures",
    "step",
    "validate_plan",
]
