"""Repositioning policies used by the rolling-horizon simulator."""

from enum import Enum
from typing import Optional

import numpy as np

from drrpvt.clustering import MainStationClustering, compute_main_stations, solve_clustered
from drrpvt.config import settings
from drrpvt.contracts.instance import DemandTensor, EconomicModel, OperatingMode, ProblemInstance
from drrpvt.contracts.plan import EpochPlan
from drrpvt.errors import ConfigError, SolverNumericalError
from drrpvt.ldd import LddParams, run_ldd
from drrpvt.milp import SolveLimits
from drrpvt.model import solve_exact
from drrpvt.simulator.engine import nearest_free_station
from drrpvt.simulator.state import SystemState
from drrpvt.util.logging import get_logger

logger = get_logger("simulator.policies")


class Policy(str, Enum):
    """Joint planning, the two single-resource baselines, and doing nothing."""

    DRRPVT = "drrpvt"
    DRRPV = "drrpv"
    DRRPT = "drrpt"
    NOOP = "noop"

    @property
    def mode(self) -> Optional[OperatingMode]:
        return {
            Policy.DRRPVT: OperatingMode.JOINT,
            Policy.DRRPV: OperatingMode.VEHICLES_ONLY,
            Policy.DRRPT: OperatingMode.TRAILERS_ONLY,
        }.get(self)


class Planner(str, Enum):
    """How a policy computes its plan: main stations + LDD, LDD on all stations, or the exact MILP."""

    CLUSTERED = "clustered"
    LDD = "ldd"
    EXACT = "exact"


def landed_arrivals(state: SystemState, instance: ProblemInstance) -> np.ndarray:
    """Returns due this epoch after redirection away from full stations.

    Bikes that find no free dock anywhere are left out.
    """
    cap = instance.station_capacity.astype(int)
    bikes = np.asarray(state.station_bikes, dtype=int).copy()
    landed = np.zeros(instance.n_stations)
    for s, due in enumerate(state.arrivals(state.epoch)):
        while due:
            target = s if bikes[s] < cap[s] else nearest_free_station(s, bikes, cap, instance.D)
            if target is None:
                break
            n = min(due, int(cap[target] - bikes[target]))
            bikes[target] += n
            landed[target] += n
            due -= n
    return landed


def planning_window(
    instance: ProblemInstance,
    state: SystemState,
    window: int,
    budget: float,
) -> ProblemInstance:
    """Instance for planning from ``state`` over the next ``window`` epochs."""
    t = state.epoch
    H = max(1, min(window, instance.horizon - t))
    stations = [s.model_copy(update={"initial_bikes": int(b)}) for s, b in zip(instance.stations, state.station_bikes)]
    vehicles = [
        v.model_copy(update={"initial_station": instance.stations[p].id, "initial_load": int(load)})
        for v, p, load in zip(instance.vehicles, state.vehicle_positions, state.vehicle_loads)
    ]
    return instance.replace(
        name=f"{instance.name}-t{t}",
        stations=stations,
        vehicles=vehicles,
        demand=DemandTensor.from_array(instance.F[:, :, t:t + H]),
        economics=EconomicModel(
            R=instance.R[:, :, t:t + H].tolist(),
            P=instance.economics.P,
            xi=instance.economics.xi,
            budget=max(0.0, budget),
            budget_per_epoch=instance.economics.budget_per_epoch,
        ),
        horizon=H,
        incoming=landed_arrivals(state, instance).tolist(),
    )


class PolicyPlanner:
    """Produces the next epoch's plan for one policy.

    The main-station clustering depends on geography only, so it is
    computed once and reused for every epoch.
    """

    def __init__(
        self,
        policy: Policy | str,
        planner: Planner | str = Planner.CLUSTERED,
        clusters: Optional[int] = None,
        seed: int = 0,
        window: Optional[int] = None,
        params: Optional[LddParams] = None,
        limits: Optional[SolveLimits] = None,
        jobs: int = 1,
    ):
        self.policy = Policy(policy)
        self.planner = Planner(planner)
        self.clusters = clusters
        self.seed = seed
        self.window = settings.PLANNING_WINDOW if window is None else window
        if self.window < 1:
            raise ConfigError(f"planning window must be at least 1 epoch, got {self.window}", window=self.window)
        self.params = params or LddParams()
        self.limits = limits or SolveLimits(time_limit_s=self.params.time_limit_s)
        self.jobs = jobs
        self._clustering: Optional[MainStationClustering] = None

    def clustering(self, instance: ProblemInstance) -> MainStationClustering:
        if self._clustering is None:
            self._clustering = compute_main_stations(instance.stations, self.clusters, self.seed)
        return self._clustering

    def plan(self, instance: ProblemInstance, state: SystemState, budget: float) -> EpochPlan:
        """Plan the epoch ``state.epoch`` of ``instance``."""
        t = state.epoch
        mode = self.policy.mode
        if mode is None:
            return EpochPlan.idle(t, list(state.vehicle_positions))

        window = planning_window(instance, state, self.window, budget)
        if mode is OperatingMode.VEHICLES_ONLY:
            window = window.replace(trailers=[])
        elif mode is OperatingMode.TRAILERS_ONLY:
            window = window.replace(vehicles=[])

        try:
            if self.planner is Planner.EXACT or (self.planner is Planner.LDD and mode is OperatingMode.TRAILERS_ONLY):
                result = solve_exact(window, mode, self.limits, self.params.backend)
                plan = EpochPlan.from_solution(result.solution, 0, epoch=t)
            elif self.planner is Planner.LDD:
                result = run_ldd(window, self.params, mode)
                plan = EpochPlan.from_solution(result.solution, 0, epoch=t)
            else:
                clustered = solve_clustered(
                    window,
                    seed=self.seed,
                    params=self.params,
                    jobs=self.jobs,
                    clustering=self.clustering(instance),
                )
                plan = clustered.epoch_plan(window, 0, epoch=t)
        except SolverNumericalError as e:
            logger.warning(f"{self.policy.value} planner failed at epoch {t}, idling: {e.message}")
            return EpochPlan.idle(t, list(state.vehicle_positions))
        return plan
