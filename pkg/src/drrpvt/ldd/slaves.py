"""The two Lagrangian slaves, the multiplier update and primal extraction."""

from dataclasses import dataclass, replace
from typing import Optional

import networkx as nx
import numpy as np

from drrpvt.contracts.instance import OperatingMode, ProblemInstance
from drrpvt.contracts.solution import Solution
from drrpvt.errors import SlaveInfeasibleError
from drrpvt.milp import MilpProblem, SolveLimits, SolveResult, SolveStatus, solve_milp
from drrpvt.model.formulation import Objective, VarLayout, build_milp, decode, with_objective
from drrpvt.util.logging import get_logger

logger = get_logger("ldd.slaves")

SOURCE = "source"
SINK = "sink"


@dataclass(frozen=True, eq=False)
class RepositionResult:
    """Optimum of the repositioning slave (minimization frame)."""

    value: float
    x: np.ndarray
    y_plus: np.ndarray
    y_minus: np.ndarray
    a_plus: np.ndarray
    a_minus: np.ndarray
    b: np.ndarray


@dataclass(frozen=True, eq=False)
class RoutingResult:
    """Optimum of the routing slave (minimization frame)."""

    value: float
    z: np.ndarray


@dataclass(frozen=True, eq=False)
class PrimalResult:
    """Feasible plan for fixed routes; ``value`` is its profit."""

    value: float
    solution: Solution


def _lower_bound(result: SolveResult, label: str) -> float:
    """Slave value usable in the dual bound."""
    if result.status is SolveStatus.INFEASIBLE:
        raise SlaveInfeasibleError(f"{label} slave is infeasible", slave=label)
    if result.status is SolveStatus.OPTIMAL:
        return float(result.incumbent_value)
    if result.best_bound is None:
        raise SlaveInfeasibleError(f"{label} slave stopped without a bound", slave=label, status=result.status.value)
    logger.warning(f"{label} slave stopped at {result.status.value}; using its bound {result.best_bound:.6g}")
    return float(result.best_bound)


class RepositionSlave:
    """Repositioning slave, built once and re-priced for each alpha."""

    def __init__(
        self,
        instance: ProblemInstance,
        mode: OperatingMode = OperatingMode.JOINT,
        limits: Optional[SolveLimits] = None,
        backend: Optional[str] = None,
    ):
        self.instance = instance
        self.layout = VarLayout(instance, mode, Objective.REPOSITION)
        self.problem: MilpProblem = build_milp(instance, mode, objective=Objective.REPOSITION)
        self.limits = limits
        self.backend = backend
        self.last: Optional[RepositionResult] = None

    def idle(self) -> RepositionResult:
        """No operations and no trips; used before any assignment exists."""
        inst = self.instance
        S, V, W, T = inst.n_stations, inst.n_vehicles, inst.n_trailers, inst.horizon
        return RepositionResult(
            value=0.0,
            x=np.zeros((S, S, T)),
            y_plus=np.zeros((S, V, T)),
            y_minus=np.zeros((S, V, T)),
            a_plus=np.zeros((S, W, T)),
            a_minus=np.zeros((S, W, T)),
            b=np.zeros((S, S, W, T)),
        )

    def solve(self, alpha: np.ndarray) -> RepositionResult:
        """Slave optimum for ``alpha``.

        When the solver stops with a bound but no assignment, the bound is
        returned with the previous assignment (or the idle one).
        """
        inst = self.instance
        problem = with_objective(self.problem, self.layout, alpha)
        result = solve_milp(problem, self.limits, self.backend)
        value = _lower_bound(result, "reposition")
        if not result.has_incumbent:
            logger.warning("reposition slave has no assignment; keeping the previous one")
            return replace(self.last or self.idle(), value=value)
        x = np.round(result.incumbent, 9)
        S, V, W, T = inst.n_stations, inst.n_vehicles, inst.n_trailers, inst.horizon

        def block(name: str, shape: tuple[int, ...]) -> np.ndarray:
            if name in self.layout:
                return np.round(self.layout.extract(x, name))
            return np.zeros(shape)

        self.last = RepositionResult(
            value=value,
            x=self.layout.extract(x, "x"),
            y_plus=block("y_plus", (S, V, T)),
            y_minus=block("y_minus", (S, V, T)),
            a_plus=block("a_plus", (S, W, T)),
            a_minus=block("a_minus", (S, W, T)),
            b=block("b", (S, S, W, T)),
        )
        return self.last


class RoutingSlave:
    """Routing slave; a shortest path for one vehicle, the MILP otherwise."""

    def __init__(
        self,
        instance: ProblemInstance,
        method: str = "auto",
        limits: Optional[SolveLimits] = None,
        backend: Optional[str] = None,
    ):
        if method not in ("auto", "graph", "milp"):
            raise ValueError(f"unknown routing method '{method}'")
        if method == "graph" and instance.n_vehicles > 1:
            raise ValueError("the shortest-path routing slave handles a single vehicle")
        self.instance = instance
        if method == "auto":
            method = "graph" if instance.n_vehicles == 1 else "milp"
        self.method = method
        self.limits = limits
        self.backend = backend
        self.layout: Optional[VarLayout] = None
        self.problem: Optional[MilpProblem] = None
        if self.method == "milp" and instance.n_vehicles > 0:
            self.layout = VarLayout(instance, OperatingMode.JOINT, Objective.ROUTING)
            self.problem = build_milp(instance, OperatingMode.JOINT, objective=Objective.ROUTING)

    def solve(self, alpha: np.ndarray) -> RoutingResult:
        inst = self.instance
        S, V, T = inst.n_stations, inst.n_vehicles, inst.horizon
        if V == 0:
            return RoutingResult(value=0.0, z=np.zeros((S, S, 0, T)))
        if self.method == "graph":
            return route_single_vehicle(inst, alpha)
        problem = with_objective(self.problem, self.layout, alpha)
        result = solve_milp(problem, self.limits, self.backend)
        value = _lower_bound(result, "routing")
        if not result.has_incumbent:
            raise SlaveInfeasibleError("routing slave returned no assignment", status=result.status.value)
        z = np.round(self.layout.extract(result.incumbent, "z"))
        return RoutingResult(value=value, z=z)


def routing_network(instance: ProblemInstance, alpha: np.ndarray, vehicle: int = 0) -> nx.DiGraph:
    """Time-expanded network for one vehicle.

    Nodes are (station, epoch) for epochs 0..T plus a source and a sink.
    Leaving s at epoch t for s' costs P[s][s'] - C* alpha[s][t][v]; staying
    idle costs 0. The cheaper of staying idle and the s -> s move is kept,
    idle on ties.
    """
    S, T = instance.n_stations, instance.horizon
    cap = float(instance.vehicle_capacity[vehicle])
    P = instance.P
    G = nx.DiGraph()
    G.add_edge(SOURCE, (int(instance.vehicle_start[vehicle]), 0), weight=0.0, move=False)
    for t in range(T):
        for s in range(S):
            gain = cap * float(alpha[s, t, vehicle])
            for s2 in range(S):
                weight = float(P[s, s2]) - gain
                if s2 == s:
                    if weight < 0.0:
                        G.add_edge((s, t), (s, t + 1), weight=weight, move=True)
                    else:
                        G.add_edge((s, t), (s, t + 1), weight=0.0, move=False)
                else:
                    G.add_edge((s, t), (s2, t + 1), weight=weight, move=True)
    for s in range(S):
        G.add_edge((s, T), SINK, weight=0.0, move=False)
    return G


def route_single_vehicle(instance: ProblemInstance, alpha: np.ndarray) -> RoutingResult:
    """Exact routing slave for a one-vehicle fleet via Bellman-Ford on the network."""
    S, T = instance.n_stations, instance.horizon
    G = routing_network(instance, alpha, 0)
    path = nx.bellman_ford_path(G, SOURCE, SINK, weight="weight")
    z = np.zeros((S, S, 1, T))
    value = 0.0
    for u, v in zip(path, path[1:]):
        data = G.edges[u, v]
        value += data["weight"]
        if data["move"]:
            (s, t), (s2, _) = u, v
            z[s, s2, 0, t] = 1.0
    return RoutingResult(value=value, z=z)


def solve_reposition_slave(
    instance: ProblemInstance,
    alpha: np.ndarray,
    mode: OperatingMode = OperatingMode.JOINT,
    limits: Optional[SolveLimits] = None,
    backend: Optional[str] = None,
) -> RepositionResult:
    """min -R.x + alpha.(y+ + y-) + P^.b under every constraint except C6-C8."""
    return RepositionSlave(instance, mode, limits, backend).solve(alpha)


def solve_routing_slave(
    instance: ProblemInstance,
    alpha: np.ndarray,
    method: str = "auto",
    limits: Optional[SolveLimits] = None,
    backend: Optional[str] = None,
) -> RoutingResult:
    """min sum z.(P - C* alpha) under C6 and C7."""
    return RoutingSlave(instance, method, limits, backend).solve(alpha)


def update_duals(
    alpha: np.ndarray,
    gamma: float,
    y_plus: np.ndarray,
    y_minus: np.ndarray,
    z: np.ndarray,
    capacities: np.ndarray,
) -> np.ndarray:
    """Projected subgradient step on the C8 multipliers.

    alpha'[s][t][v] = max(0, alpha + gamma (y+ + y- - C*_v sum_s' z[s][s'][v][t])).
    """
    operations = (np.asarray(y_plus) + np.asarray(y_minus)).transpose(0, 2, 1)
    departures = np.asarray(z).sum(axis=1).transpose(0, 2, 1)
    subgradient = operations - np.asarray(capacities, dtype=float)[None, None, :] * departures
    return np.maximum(0.0, np.asarray(alpha, dtype=float) + gamma * subgradient)


def extract_primal(
    instance: ProblemInstance,
    z: np.ndarray,
    mode: OperatingMode = OperatingMode.JOINT,
    limits: Optional[SolveLimits] = None,
    backend: Optional[str] = None,
) -> PrimalResult:
    """Best repositioning plan for fixed routes ``z``, net of their routing cost."""
    layout = VarLayout(instance, mode, Objective.FULL)
    problem = build_milp(instance, mode, fixed_routes=z)
    result = solve_milp(problem, limits, backend)
    if not result.has_incumbent:
        raise SlaveInfeasibleError(
            "no feasible repositioning for the given routes", status=result.status.value
        )
    return PrimalResult(value=float(result.incumbent_value), solution=decode(layout, result.incumbent))
