"""Lagrangian dual decomposition of the joint repositioning problem."""

from drrpvt.ldd.master import run_ldd
from drrpvt.ldd.slaves import (
    PrimalResult,
    RepositionResult,
    RepositionSlave,
    RoutingResult,
    RoutingSlave,
    extract_primal,
    route_single_vehicle,
    routing_network,
    solve_reposition_slave,
    solve_routing_slave,
    update_duals,
)
from drrpvt.ldd.state import DualState, LddParams, LddResult, TraceRow

__all__ = [
    "DualState",
    "LddParams",
    "LddResult",
    "PrimalResult",
    "RepositionResult",
    "RepositionSlave",
    "RoutingResult",
    "RoutingSlave",
    "TraceRow",
    "extract_primal",
    "route_single_vehicle",
    "routing_network",
    "run_ldd",
    "solve_reposition_slave",
    "solve_routing_slave",
    "update_duals",
]
