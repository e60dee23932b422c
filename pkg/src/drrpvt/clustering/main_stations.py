"""Main-station clustering and instance reduction.

Stations are grouped by k-means on a planar projection; each cluster's
medoid (by great-circle distance) becomes its main station. Carrier
vehicles plan on the reduced instance over main stations while trailers
plan inside each cluster.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from sklearn.cluster import KMeans

from drrpvt.clustering.geo import pairwise_haversine, project_km
from drrpvt.config import settings
from drrpvt.contracts.instance import (
    DemandTensor,
    DistanceMatrix,
    EconomicModel,
    OperatingMode,
    ProblemInstance,
    Station,
    Trailer,
    Vehicle,
)
from drrpvt.contracts.plan import EpochPlan, TrailerAction, VehicleAction
from drrpvt.contracts.solution import Solution
from drrpvt.errors import ConfigError
from drrpvt.ldd import LddParams, LddResult, run_ldd
from drrpvt.model.exact import solve_exact
from drrpvt.milp import SolveLimits
from drrpvt.util.logging import get_logger

logger = get_logger("clustering")


class MainStationClustering(BaseModel):
    """Station-to-cluster assignment with one representative per cluster."""

    model_config = ConfigDict(frozen=True)

    assignment: dict[str, int] = Field(..., description="Station id -> cluster id")
    representatives: dict[int, str] = Field(..., description="Cluster id -> main station id")
    k: int = Field(..., ge=1, description="Cluster count")

    def members(self, cluster: int, station_ids: Sequence[str]) -> list[str]:
        """Member ids of a cluster, in station order."""
        return [sid for sid in station_ids if self.assignment[sid] == cluster]


def default_cluster_count(n_stations: int) -> int:
    """One main station per ``CLUSTER_GROUP_SIZE`` stations, rounded up."""
    return max(1, math.ceil(n_stations / settings.CLUSTER_GROUP_SIZE))


def _kmeans_labels(points: np.ndarray, k: int, seed: int) -> np.ndarray:
    model = KMeans(n_clusters=k, random_state=seed, n_init=10)
    return model.fit_predict(points)


def _medoid(members: np.ndarray, D: np.ndarray) -> int:
    """Member minimizing total distance to the others; lowest index on ties."""
    totals = D[np.ix_(members, members)].sum(axis=1)
    return int(members[int(np.argmin(totals))])


def _fill_empty_clusters(labels: np.ndarray, k: int, D: np.ndarray) -> np.ndarray:
    """Reseed missing clusters with the point farthest from its medoid."""
    labels = labels.copy()
    while len(np.unique(labels)) < k:
        used = set(int(c) for c in np.unique(labels))
        free = min(c for c in range(k) if c not in used)
        best_point, best_dist = -1, -1.0
        for c in sorted(used):
            members = np.flatnonzero(labels == c)
            if members.size < 2:
                continue
            medoid = _medoid(members, D)
            far = members[int(np.argmax(D[medoid, members]))]
            if D[medoid, far] > best_dist:
                best_point, best_dist = int(far), float(D[medoid, far])
        labels[best_point] = free
    return labels


def _bisect_wide_clusters(labels: np.ndarray, points: np.ndarray, D: np.ndarray, max_diameter_km: float, seed: int) -> np.ndarray:
    """Split clusters with 2-means until every diameter fits."""
    labels = labels.copy()
    pending = sorted(set(int(c) for c in labels))
    while pending:
        c = pending.pop(0)
        members = np.flatnonzero(labels == c)
        if members.size < 2 or D[np.ix_(members, members)].max() <= max_diameter_km:
            continue
        halves = _kmeans_labels(points[members], 2, seed)
        if len(np.unique(halves)) < 2:
            # Coincident points: split off the farthest member
            halves = np.zeros(members.size, dtype=int)
            halves[int(np.argmax(D[members[0], members]))] = 1
        new = int(labels.max()) + 1
        labels[members[halves == 1]] = new
        pending += [c, new]
    return labels


def compute_main_stations(
    stations: Sequence[Station],
    k: Optional[int] = None,
    seed: int = 0,
    max_diameter_km: Optional[float] = None,
) -> MainStationClustering:
    """Group stations into k clusters and pick each cluster's medoid.

    Clusters are numbered by their lowest-index member. With
    ``max_diameter_km`` set, clusters wider than it are bisected, so the
    result may hold more than k clusters.
    """
    n = len(stations)
    k = default_cluster_count(n) if k is None else k
    if n == 0:
        raise ConfigError("cannot cluster an empty station set")
    if k < 1 or k > n:
        raise ConfigError(f"cluster count {k} must lie in [1, {n}]", k=k, n_stations=n)

    coords = np.array([[s.latitude, s.longitude] for s in stations], dtype=float)
    D = pairwise_haversine(coords)
    points = project_km(coords)

    if k == n:
        labels = np.arange(n)
    else:
        labels = _fill_empty_clusters(_kmeans_labels(points, k, seed), k, D)
    if max_diameter_km is not None:
        labels = _bisect_wide_clusters(labels, points, D, max_diameter_km, seed)

    # Renumber clusters by their first member
    order: dict[int, int] = {}
    for label in labels:
        order.setdefault(int(label), len(order))
    labels = np.array([order[int(label)] for label in labels])

    ids = [s.id for s in stations]
    representatives = {}
    for c in range(len(order)):
        members = np.flatnonzero(labels == c)
        representatives[c] = ids[_medoid(members, D)]
    clustering = MainStationClustering(
        assignment={sid: int(label) for sid, label in zip(ids, labels)},
        representatives=representatives,
        k=len(order),
    )
    logger.info(f"clustered {n} stations into {clustering.k} main stations")
    return clustering


def clustering_frame(clustering: MainStationClustering, stations: Sequence[Station]) -> pd.DataFrame:
    """station_id, cluster_id, representative_flag per station."""
    reps = set(clustering.representatives.values())
    return pd.DataFrame(
        {
            "station_id": [s.id for s in stations],
            "cluster_id": [clustering.assignment[s.id] for s in stations],
            "representative_flag": [s.id in reps for s in stations],
        }
    )


@dataclass(frozen=True, eq=False)
class ReducedInstance:
    """Main-station instance plus one trailer subinstance per cluster."""

    reduced: ProblemInstance
    subinstances: list[ProblemInstance]
    clustering: MainStationClustering
    members: list[list[int]]
    representative_index: list[int]

    def cluster_of(self, station: int) -> int:
        for c, members in enumerate(self.members):
            if station in members:
                return c
        raise KeyError(station)

    def diagonal_revenue(self, sol: Solution, clusters: Sequence[int]) -> float:
        """Reduced-instance revenue of trips that start and end inside ``clusters``."""
        R = self.reduced.R
        return float(sum(np.sum(R[c, c] * sol.x[c, c]) for c in clusters))


def _assign_trailers(instance: ProblemInstance, clustering: MainStationClustering, members: list[list[int]]) -> list[list[int]]:
    """Trailers per cluster: by home station, the rest round-robin over clusters by size."""
    per_cluster: list[list[int]] = [[] for _ in members]
    floating = []
    for w, trailer in enumerate(instance.trailers):
        if trailer.home_station is not None:
            per_cluster[clustering.assignment[trailer.home_station]].append(w)
        else:
            floating.append(w)
    by_size = sorted(range(len(members)), key=lambda c: (-len(members[c]), c))
    for i, w in enumerate(floating):
        per_cluster[by_size[i % len(by_size)]].append(w)
    return per_cluster


def reduce_instance(instance: ProblemInstance, clustering: MainStationClustering) -> ReducedInstance:
    """Aggregate the instance over main stations and split off cluster subinstances.

    Capacities, bikes, in-transit arrivals and demand are summed per
    cluster; revenue is demand-weighted. Distances and routing costs are
    taken between representatives. Demand inside a cluster sits on the
    reduced diagonal, so vehicles see the bikes it consumes, and also in
    that cluster's subinstance.
    """
    ids = [s.id for s in instance.stations]
    k = clustering.k
    members = [[i for i, sid in enumerate(ids) if clustering.assignment[sid] == c] for c in range(k)]
    rep_idx = [instance.station_index[clustering.representatives[c]] for c in range(k)]
    F, R, T = instance.F, instance.R, instance.horizon

    F_red = np.zeros((k, k, T))
    R_red = np.zeros((k, k, T))
    for c in range(k):
        for c2 in range(k):
            block_F = F[np.ix_(members[c], members[c2])]
            block_R = R[np.ix_(members[c], members[c2])]
            F_red[c, c2] = block_F.sum(axis=(0, 1))
            weighted = (block_F * block_R).sum(axis=(0, 1))
            mean_R = block_R.mean(axis=(0, 1))
            with np.errstate(divide="ignore", invalid="ignore"):
                R_red[c, c2] = np.where(F_red[c, c2] > 0, weighted / np.where(F_red[c, c2] > 0, F_red[c, c2], 1.0), mean_R)

    stations = [
        Station(
            id=instance.stations[rep_idx[c]].id,
            latitude=instance.stations[rep_idx[c]].latitude,
            longitude=instance.stations[rep_idx[c]].longitude,
            capacity=int(sum(instance.stations[i].capacity for i in members[c])),
            initial_bikes=int(sum(instance.stations[i].initial_bikes for i in members[c])),
        )
        for c in range(k)
    ]
    vehicles = [
        Vehicle(
            id=v.id,
            capacity=v.capacity,
            initial_station=clustering.representatives[clustering.assignment[v.initial_station]],
            initial_load=v.initial_load,
        )
        for v in instance.vehicles
    ]
    incoming = None
    if instance.incoming is not None:
        incoming = [float(instance.incoming_bikes[m].sum()) for m in members]

    P_rep = instance.P[np.ix_(rep_idx, rep_idx)]
    D_rep = instance.D[np.ix_(rep_idx, rep_idx)]
    reduced = ProblemInstance(
        name=f"{instance.name}-main",
        stations=stations,
        vehicles=vehicles,
        trailers=[],
        demand=DemandTensor.from_array(F_red),
        economics=EconomicModel(
            R=R_red.tolist(),
            P=P_rep.tolist(),
            xi=instance.economics.xi,
            budget=0.0,
            budget_per_epoch=instance.economics.budget_per_epoch,
        ),
        distances=DistanceMatrix(D=D_rep.tolist()),
        horizon=T,
        epoch_minutes=instance.epoch_minutes,
        incoming=incoming,
    )

    trailer_groups = _assign_trailers(instance, clustering, members)
    W = instance.n_trailers
    subinstances = []
    for c in range(k):
        m = members[c]
        trailers: list[Trailer] = [instance.trailers[w] for w in trailer_groups[c]]
        share = instance.economics.budget * len(trailers) / W if W else 0.0
        sub_P = instance.P[np.ix_(m, m)]
        sub_D = instance.D[np.ix_(m, m)]
        subinstances.append(
            ProblemInstance(
                name=f"{instance.name}-cluster{c}",
                stations=[instance.stations[i] for i in m],
                vehicles=[],
                trailers=[t.model_copy(update={"home_station": None}) for t in trailers],
                demand=DemandTensor.from_array(F[np.ix_(m, m)]),
                economics=EconomicModel(
                    R=R[np.ix_(m, m)].tolist(),
                    P=sub_P.tolist(),
                    xi=instance.economics.xi,
                    budget=share,
                    budget_per_epoch=instance.economics.budget_per_epoch,
                ),
                distances=DistanceMatrix(D=sub_D.tolist()),
                horizon=T,
                epoch_minutes=instance.epoch_minutes,
                incoming=None if instance.incoming is None else [float(instance.incoming_bikes[i]) for i in m],
            )
        )
    return ReducedInstance(
        reduced=reduced,
        subinstances=subinstances,
        clustering=clustering,
        members=members,
        representative_index=rep_idx,
    )


@dataclass(frozen=True, eq=False)
class ClusteredPlan:
    """Result of planning on main stations plus per-cluster trailer plans."""

    reduction: ReducedInstance
    vehicle_plan: Optional[LddResult]
    trailer_plans: dict[int, Solution] = field(default_factory=dict)
    trailer_values: dict[int, float] = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def planned_value(self) -> float:
        """Reduced-instance profit plus the trailer subinstance profits.

        Within-cluster revenue of a cluster with a trailer plan is taken from
        that plan only, so it is not counted a second time on the reduced
        diagonal.
        """
        vehicles = 0.0
        if self.vehicle_plan is not None:
            vehicles = self.vehicle_plan.primal_value - self.reduction.diagonal_revenue(
                self.vehicle_plan.solution, list(self.trailer_values)
            )
        return vehicles + sum(self.trailer_values.values())

    def epoch_plan(self, instance: ProblemInstance, t: int = 0, epoch: Optional[int] = None) -> EpochPlan:
        """Actions for epoch ``t`` on the original station indices.

        Vehicles operate at the station they actually occupy and move to the
        main station of their destination cluster.
        """
        red = self.reduction
        vehicles = []
        starts = instance.vehicle_start
        if self.vehicle_plan is not None:
            reduced_plan = EpochPlan.from_solution(self.vehicle_plan.solution, t)
            for action in reduced_plan.vehicles:
                here = int(starts[action.vehicle])
                destination = red.representative_index[action.destination] if action.moves or action.pickup or action.dropoff else here
                vehicles.append(
                    VehicleAction(
                        vehicle=action.vehicle,
                        station=here,
                        destination=destination,
                        pickup=action.pickup,
                        dropoff=action.dropoff,
                    )
                )
        else:
            vehicles = [VehicleAction(vehicle=v, station=int(p), destination=int(p)) for v, p in enumerate(starts)]

        trailers = []
        trailer_ids = {w.id: i for i, w in enumerate(instance.trailers)}
        for c, sol in sorted(self.trailer_plans.items()):
            sub = red.subinstances[c]
            local = EpochPlan.from_solution(sol, t)
            for action in local.trailers:
                trailers.append(
                    TrailerAction(
                        trailer=trailer_ids[sub.trailers[action.trailer].id],
                        origin=red.members[c][action.origin],
                        destination=red.members[c][action.destination],
                        quantity=action.quantity,
                        value=action.value,
                    )
                )
        trailers.sort(key=lambda a: a.trailer)
        return EpochPlan(epoch=t if epoch is None else epoch, vehicles=vehicles, trailers=trailers)


def solve_clustered(
    instance: ProblemInstance,
    k: Optional[int] = None,
    seed: int = 0,
    params: Optional[LddParams] = None,
    jobs: int = 1,
    max_diameter_km: Optional[float] = None,
    clustering: Optional[MainStationClustering] = None,
) -> ClusteredPlan:
    """Plan with main stations: LDD on the reduced instance, exact trailer plans per cluster."""
    start = time.perf_counter()
    params = params or LddParams()
    clustering = clustering or compute_main_stations(instance.stations, k, seed, max_diameter_km)
    reduction = reduce_instance(instance, clustering)

    vehicle_plan = run_ldd(reduction.reduced, params) if instance.n_vehicles else None

    limits = SolveLimits(time_limit_s=params.time_limit_s)
    todo = [c for c, sub in enumerate(reduction.subinstances) if sub.n_trailers]

    def solve_cluster(c: int):
        return c, solve_exact(reduction.subinstances[c], OperatingMode.TRAILERS_ONLY, limits, params.backend)

    if jobs > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(solve_cluster, todo))
    else:
        results = [solve_cluster(c) for c in todo]

    plan = ClusteredPlan(
        reduction=reduction,
        vehicle_plan=vehicle_plan,
        trailer_plans={c: r.solution for c, r in results},
        trailer_values={c: r.value for c, r in results},
        wall_time=time.perf_counter() - start,
    )
    logger.info(
        f"clustered plan for '{instance.name}': {clustering.k} main stations, "
        f"{len(todo)} trailer subproblems, {plan.wall_time:.2f}s"
    )
    return plan
