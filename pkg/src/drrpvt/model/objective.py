"""Profit objective and trailer task values."""

import numpy as np

from drrpvt.contracts.instance import ProblemInstance
from drrpvt.contracts.solution import Solution, tensor_shapes
from drrpvt.errors import DimensionMismatchError


def validate_shapes(instance: ProblemInstance, sol: Solution) -> None:
    """Raise ``DimensionMismatchError`` for the first tensor with a wrong shape."""
    expected = tensor_shapes(instance.n_stations, instance.n_vehicles, instance.n_trailers, instance.horizon)
    for name, shape in expected.items():
        found = tuple(getattr(sol, name).shape)
        if found != shape:
            raise DimensionMismatchError(name, shape, found)


def transition_fractions(F: np.ndarray) -> np.ndarray:
    """F[s][s'][t] / sum over s'' of F[s][s''][t], with 0/0 taken as 0."""
    totals = F.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(totals > 0, F / np.where(totals > 0, totals, 1.0), 0.0)
    return frac


def reference_inventories(instance: ProblemInstance) -> np.ndarray:
    """Station inventories d[s][t], t = 0..T, when nobody repositions.

    Departures are served pro rata up to the docked bikes, arrivals land one
    epoch later, and inventories are clipped to the dock count.
    """
    S, T = instance.n_stations, instance.horizon
    cap = instance.station_capacity
    d = np.zeros((S, T + 1))
    d[:, 0] = instance.initial_bikes
    arrivals = instance.incoming_bikes.copy()
    F = instance.F
    for t in range(T):
        demand = F[:, :, t]
        wanted = demand.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(wanted > 0, np.minimum(1.0, d[:, t] / np.where(wanted > 0, wanted, 1.0)), 0.0)
        flow = demand * ratio[:, None]
        d[:, t + 1] = np.clip(d[:, t] - flow.sum(axis=1) + arrivals, 0.0, cap)
        arrivals = flow.sum(axis=0)
    return d


def trailer_task_values(instance: ProblemInstance, d_sharp_t: np.ndarray, t: int) -> np.ndarray:
    """Value of a trailer task s -> s' at epoch t: xi * max(0, F[s][s'][t] - d[s])."""
    shortage = instance.F[:, :, t] - np.asarray(d_sharp_t, dtype=float)[:, None]
    return instance.economics.xi * np.maximum(shortage, 0.0)


def task_value_tensor(instance: ProblemInstance) -> np.ndarray:
    """P^[s][s'][t] for the whole horizon, priced on the reference inventories."""
    S, T = instance.n_stations, instance.horizon
    values = np.zeros((S, S, T))
    if S == 0 or T == 0:
        return values
    d_ref = reference_inventories(instance)
    for t in range(T):
        values[:, :, t] = trailer_task_values(instance, d_ref[:, t], t)
    return values


def objective_terms(instance: ProblemInstance, sol: Solution) -> dict[str, float]:
    """Revenue, routing cost and trailer cost of a solution."""
    validate_shapes(instance, sol)
    revenue = float(np.sum(instance.R * sol.x))
    routing = float(np.einsum("ij,ijvt->", instance.P, sol.z)) if sol.z.size else 0.0
    trailer = float(np.einsum("ijwt,ijt->", sol.b, task_value_tensor(instance))) if sol.b.size else 0.0
    return {"revenue": revenue, "routing_cost": routing, "trailer_cost": trailer}


def evaluate_objective(instance: ProblemInstance, sol: Solution) -> float:
    """Profit: sum R*x - sum P*z - sum b*P^."""
    terms = objective_terms(instance, sol)
    return terms["revenue"] - terms["routing_cost"] - terms["trailer_cost"]
