"""Epoch transition: execute a plan against realized demand.

Within an epoch events happen in this order:

1. vehicle and trailer pickups,
2. customer departures, served pro rata up to the docked bikes,
3. vehicle and trailer dropoffs,
4. customer returns due this epoch; a return to a full station goes to the
   nearest station with a free dock, or stays in transit if none has one.

Vehicles end the epoch at their action's destination.
"""

from typing import Optional

import numpy as np

from drrpvt.contracts.instance import ProblemInstance
from drrpvt.contracts.plan import EpochPlan, TrailerAction, VehicleAction
from drrpvt.contracts.solution import ConstraintViolation
from drrpvt.errors import ConservationError, PlanInfeasibleError
from drrpvt.simulator.metrics import EpochMetrics, ServiceRecord
from drrpvt.simulator.state import SystemState, TransitBatch
from drrpvt.util.logging import get_logger

logger = get_logger("simulator")


def _vehicle_actions(state: SystemState, plan: EpochPlan) -> list[VehicleAction]:
    """One action per vehicle; vehicles the plan does not mention stay put."""
    by_vehicle = {a.vehicle: a for a in plan.vehicles}
    actions = []
    for v, position in enumerate(state.vehicle_positions):
        actions.append(by_vehicle.get(v) or VehicleAction(vehicle=v, station=position, destination=position))
    return actions


def validate_plan(state: SystemState, plan: EpochPlan, instance: ProblemInstance) -> list[ConstraintViolation]:
    """Violations of executing ``plan`` from ``state``.

    Pickups at a station are limited by its docked bikes and dropoffs by
    its free docks, both taken at the start of the epoch.
    """
    S, V = instance.n_stations, instance.n_vehicles
    t = state.epoch
    bikes = np.asarray(state.station_bikes, dtype=int)
    cap = instance.station_capacity.astype(int)
    pick = np.zeros(S, dtype=int)
    drop = np.zeros(S, dtype=int)
    violations: list[ConstraintViolation] = []

    def add(cid: str, magnitude: float, detail: str, **location: int) -> None:
        violations.append(
            ConstraintViolation(constraint_id=cid, location={**location, "t": t}, magnitude=float(magnitude), detail=detail)
        )

    for a in plan.vehicles:
        if a.vehicle >= V or a.station >= S or a.destination >= S:
            add("C15", 1, "vehicle action references an unknown vehicle or station", v=a.vehicle)
            continue
        position = state.vehicle_positions[a.vehicle]
        if a.station != position:
            add("C6", 1, f"vehicle is at station {position}, not {a.station}", v=a.vehicle, s=a.station)
        load = state.vehicle_loads[a.vehicle]
        after_pickup = load + a.pickup
        if after_pickup > instance.vehicle_capacity[a.vehicle]:
            add("C15", after_pickup - instance.vehicle_capacity[a.vehicle], "vehicle capacity", v=a.vehicle)
        if a.dropoff > after_pickup:
            add("C5", a.dropoff - after_pickup, "dropoff exceeds bikes on board", v=a.vehicle)
        pick[a.station] += a.pickup
        drop[a.station] += a.dropoff

    seen: set[int] = set()
    for a in plan.trailers:
        if a.trailer >= instance.n_trailers or a.origin >= S or a.destination >= S:
            add("C15", 1, "trailer task references an unknown trailer or station", w=a.trailer)
            continue
        if a.trailer in seen:
            add("C13", 1, "trailer has more than one task", w=a.trailer)
        seen.add(a.trailer)
        if a.quantity > instance.trailer_capacity[a.trailer]:
            add("C9", a.quantity - instance.trailer_capacity[a.trailer], "trailer capacity", w=a.trailer)
        reach = instance.D[a.origin, a.destination] - instance.trailer_range[a.trailer]
        if reach > 0:
            add("C12", reach, "task longer than trailer range", w=a.trailer, s=a.origin, s2=a.destination)
        pick[a.origin] += a.quantity
        drop[a.destination] += a.quantity

    for s in range(S):
        if pick[s] > bikes[s]:
            add("C10", pick[s] - bikes[s], "pickups exceed docked bikes", s=s)
        if drop[s] > cap[s] - bikes[s]:
            add("C11", drop[s] - (cap[s] - bikes[s]), "dropoffs exceed free docks", s=s)
    return violations


def repair_plan(state: SystemState, plan: EpochPlan, instance: ProblemInstance) -> EpochPlan:
    """Clip a plan until it can be executed from ``state``.

    Trailer tasks claim bikes and docks first, in trailer order; vehicles
    then work with what is left, at the station they actually occupy.
    Infeasible trailer tasks are dropped.
    """
    S = instance.n_stations
    bikes = np.asarray(state.station_bikes, dtype=int).copy()
    free = instance.station_capacity.astype(int) - bikes

    trailers: list[TrailerAction] = []
    busy: set[int] = set()
    for a in sorted(plan.trailers, key=lambda a: a.trailer):
        if a.trailer >= instance.n_trailers or a.trailer in busy or a.origin >= S or a.destination >= S:
            continue
        if a.origin == a.destination or instance.D[a.origin, a.destination] > instance.trailer_range[a.trailer]:
            continue
        q = min(a.quantity, int(instance.trailer_capacity[a.trailer]), int(bikes[a.origin]), int(free[a.destination]))
        if q < 1:
            continue
        bikes[a.origin] -= q
        free[a.destination] -= q
        busy.add(a.trailer)
        trailers.append(a.model_copy(update={"quantity": q}))

    vehicles: list[VehicleAction] = []
    for a in _vehicle_actions(state, plan):
        if a.vehicle >= instance.n_vehicles:
            continue
        here = state.vehicle_positions[a.vehicle]
        destination = a.destination if a.destination < S else here
        load = state.vehicle_loads[a.vehicle]
        pickup = max(0, min(a.pickup, int(bikes[here]), int(instance.vehicle_capacity[a.vehicle]) - load))
        dropoff = max(0, min(a.dropoff, load + pickup, int(free[here])))
        bikes[here] -= pickup
        free[here] -= dropoff
        vehicles.append(
            VehicleAction(vehicle=a.vehicle, station=here, destination=destination, pickup=pickup, dropoff=dropoff)
        )

    repaired = EpochPlan(epoch=plan.epoch, vehicles=vehicles, trailers=trailers)
    if repaired.bikes_moved != plan.bikes_moved or len(trailers) != len(plan.trailers):
        logger.debug(
            f"epoch {plan.epoch}: repaired plan moves {repaired.bikes_moved} of {plan.bikes_moved} planned bikes, "
            f"{len(trailers)}/{len(plan.trailers)} trailer tasks kept"
        )
    return repaired


def serve_departures(available: int, requests: np.ndarray) -> np.ndarray:
    """Split ``available`` bikes over destinations in proportion to requests.

    Floors of the proportional quotas are topped up one bike at a time in
    order of largest remainder, ties to the lowest destination index.
    """
    requests = np.asarray(requests, dtype=int)
    wanted = int(requests.sum())
    if wanted <= available:
        return requests.copy()
    if available <= 0:
        return np.zeros_like(requests)
    quotas = requests * available / wanted
    served = np.floor(quotas).astype(int)
    remainder = quotas - served
    order = sorted(range(len(requests)), key=lambda j: (-remainder[j], j))
    for j in order[: available - int(served.sum())]:
        served[j] += 1
    return served


def nearest_free_station(s: int, bikes: np.ndarray, cap: np.ndarray, D: np.ndarray) -> Optional[int]:
    """Closest station to ``s`` with a free dock, ties to the lowest index."""
    candidates = [j for j in range(len(bikes)) if bikes[j] < cap[j]]
    if not candidates:
        return None
    return min(candidates, key=lambda j: (D[s, j], j))


def step(
    state: SystemState,
    plan: EpochPlan,
    realized: np.ndarray,
    instance: ProblemInstance,
    trailer_payment: float = 0.0,
) -> tuple[SystemState, EpochMetrics, list[ServiceRecord]]:
    """Advance one epoch.

    Args:
        state: State at the start of the epoch
        plan: Actions for this epoch; must pass ``validate_plan``
        realized: Integer departures realized[s][s'] requested this epoch
        instance: Full-horizon instance supplying capacities, R, P and D
        trailer_payment: Amount paid to trailer users for this epoch's tasks

    Returns:
        Next state, epoch metrics and one service record per station

    Raises:
        PlanInfeasibleError: If the plan violates the state's inventories
    """
    violations = validate_plan(state, plan, instance)
    if violations:
        raise PlanInfeasibleError(violations, state.epoch)

    t = state.epoch
    S = instance.n_stations
    realized = np.asarray(realized, dtype=int)
    cap = instance.station_capacity.astype(int)
    bikes = np.asarray(state.station_bikes, dtype=int).copy()
    loads = np.asarray(state.vehicle_loads, dtype=int).copy()
    vehicles = _vehicle_actions(state, plan)

    # 1. pickups
    for a in vehicles:
        bikes[a.station] -= a.pickup
        loads[a.vehicle] += a.pickup
    for a in plan.trailers:
        bikes[a.origin] -= a.quantity

    # 2. departures
    served = np.zeros((S, S), dtype=int)
    for s in range(S):
        served[s] = serve_departures(int(bikes[s]), realized[s])
        bikes[s] -= int(served[s].sum())
    lost = int(realized.sum() - served.sum())

    # 3. dropoffs
    for a in vehicles:
        bikes[a.station] += a.dropoff
        loads[a.vehicle] -= a.dropoff
    for a in plan.trailers:
        bikes[a.destination] += a.quantity

    # 4. returns
    redirected = stranded = 0
    carried: list[TransitBatch] = []
    for batch in state.in_transit:
        if batch.arrival_epoch != t:
            carried.append(batch)
            continue
        remaining = batch.count
        target = batch.destination
        while remaining:
            if bikes[target] >= cap[target]:
                nearest = nearest_free_station(batch.destination, bikes, cap, instance.D)
                if nearest is None:
                    break
                target = nearest
            landed = min(remaining, int(cap[target] - bikes[target]))
            bikes[target] += landed
            remaining -= landed
            if target != batch.destination:
                redirected += landed
        if remaining:
            stranded += remaining
            carried.append(TransitBatch(destination=batch.destination, arrival_epoch=t + 1, count=remaining))
    for s, s2 in zip(*np.nonzero(served)):
        carried.append(TransitBatch(destination=int(s2), arrival_epoch=t + 1, count=int(served[s, s2])))

    revenue = float(np.sum(instance.R[:, :, t] * served)) if t < instance.horizon else 0.0
    routing = float(sum(instance.P[a.station, a.destination] for a in vehicles))
    metrics = EpochMetrics(
        epoch=t,
        demand=int(realized.sum()),
        served=int(served.sum()),
        lost=lost,
        revenue=revenue,
        routing_cost=routing,
        trailer_payment=trailer_payment,
        bikes_moved=plan.bikes_moved,
        redirected=redirected,
        stranded=stranded,
    )
    service = [
        ServiceRecord(station=instance.stations[s].id, epoch=t, actual=int(realized[s].sum()), served=int(served[s].sum()))
        for s in range(S)
    ]
    next_state = SystemState(
        epoch=t + 1,
        station_bikes=bikes.tolist(),
        vehicle_loads=loads.tolist(),
        vehicle_positions=[a.destination for a in vehicles],
        in_transit=carried,
    )
    if next_state.total_bikes() != state.total_bikes():
        raise ConservationError(t, state.total_bikes(), next_state.total_bikes())
    return next_state, metrics, service
