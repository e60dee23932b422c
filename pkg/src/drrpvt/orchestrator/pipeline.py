"""Pipelines behind the solve, simulate and experiment commands."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterable, Literal, Optional

import pandas as pd
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from drrpvt.artifacts import ArtifactStore
from drrpvt.clustering import ClusteredPlan, clustering_frame, solve_clustered
from drrpvt.contracts.instance import OperatingMode, ProblemInstance
from drrpvt.contracts.solution import Solution
from drrpvt.errors import ConfigError
from drrpvt.ingest import SyntheticConfig, generate_synthetic
from drrpvt.ldd import LddParams, LddResult, run_ldd
from drrpvt.milp import SolveLimits, SolveStatus
from drrpvt.model import check_solution, solve_exact
from drrpvt.simulator import (
    ComparisonMetrics,
    Planner,
    Policy,
    SimulationReport,
    comparison_frame,
    run_comparison,
    run_policy,
)
from drrpvt.util.logging import get_logger, timed

logger = get_logger("pipeline")


class SolverKind(str, Enum):
    MILP = "milp"
    LDD = "ldd"
    CLUSTERED = "clustered"


@dataclass
class SolveOutcome:
    """Result of a single-shot planning solve."""

    solver: str
    mode: str
    objective: float
    wall_time: float
    solution: Optional[Solution] = None
    optimal: Optional[bool] = None
    dual_bound: Optional[float] = None
    ldd: Optional[LddResult] = None
    clustered: Optional[ClusteredPlan] = None
    violations: int = 0

    def summary(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "solver": self.solver,
            "mode": self.mode,
            "objective": self.objective,
            "wall_time": self.wall_time,
            "optimal": self.optimal,
            "dual_bound": self.dual_bound,
            "violations": self.violations,
        }
        if self.ldd is not None:
            data["ldd"] = self.ldd.summary()
        if self.clustered is not None:
            data["main_stations"] = self.clustered.reduction.clustering.k
        return data


def solve_instance(
    instance: ProblemInstance,
    solver: SolverKind | str = SolverKind.MILP,
    mode: OperatingMode | str = OperatingMode.JOINT,
    params: Optional[LddParams] = None,
    backend: Optional[str] = None,
    clusters: Optional[int] = None,
    seed: int = 0,
    jobs: int = 1,
) -> SolveOutcome:
    """Plan the whole horizon once.

    Trailer-only problems have no coupling constraint, so the LDD solvers
    hand them to the exact MILP.
    """
    solver = SolverKind(solver)
    mode = OperatingMode(mode)
    params = params or LddParams()
    if backend is not None:
        params = params.model_copy(update={"backend": backend})
    limits = SolveLimits(time_limit_s=params.time_limit_s)

    if solver is not SolverKind.MILP and mode is OperatingMode.TRAILERS_ONLY:
        logger.info("trailer-only planning is solved exactly")
        solver = SolverKind.MILP

    if solver is SolverKind.MILP:
        with timed(f"exact solve of '{instance.name}'", logger) as timing:
            exact = solve_exact(instance, mode, limits, params.backend)
        outcome = SolveOutcome(
            solver=solver.value,
            mode=mode.value,
            objective=exact.value,
            wall_time=timing.seconds,
            solution=exact.solution,
            optimal=exact.optimal,
            dual_bound=exact.result.best_bound,
        )
    elif solver is SolverKind.LDD:
        with timed(f"LDD on '{instance.name}'", logger) as timing:
            result = run_ldd(instance, params, mode)
        outcome = SolveOutcome(
            solver=solver.value,
            mode=mode.value,
            objective=result.primal_value,
            wall_time=timing.seconds,
            solution=result.solution,
            optimal=result.converged,
            dual_bound=-result.dual_bound,
            ldd=result,
        )
    else:
        if mode is OperatingMode.VEHICLES_ONLY:
            instance = instance.replace(trailers=[])
        plan = solve_clustered(instance, clusters, seed, params, jobs)
        return SolveOutcome(
            solver=solver.value,
            mode=mode.value,
            objective=plan.planned_value,
            wall_time=plan.wall_time,
            clustered=plan,
        )

    outcome.violations = len(check_solution(instance, outcome.solution))
    if outcome.violations:
        logger.warning(f"{solver.value} solution has {outcome.violations} constraint violation(s)")
    return outcome


def write_solve_artifacts(store: ArtifactStore, outcome: SolveOutcome, instance: ProblemInstance) -> None:
    store.save_json("summary.json", outcome.summary())
    if outcome.solution is not None:
        store.save_solution(outcome.solution)
    if outcome.ldd is not None:
        store.save_frame("gap_trace.csv", outcome.ldd.trace_frame())
    if outcome.clustered is not None:
        store.save_frame("clustering.csv", clustering_frame(outcome.clustered.reduction.clustering, instance.stations))
        plans = [outcome.clustered.epoch_plan(instance, t).model_dump(mode="json") for t in range(instance.horizon)]
        store.save_json("plan.json", {"epochs": plans})
        if outcome.clustered.vehicle_plan is not None:
            store.save_solution(outcome.clustered.vehicle_plan.solution, "main_solution.json")
        for c, sol in sorted(outcome.clustered.trailer_plans.items()):
            store.save_solution(sol, f"cluster{c}_solution.json")


# Simulation ------------------------------------------------------------------


def write_report(store: ArtifactStore, report: SimulationReport, prefix: str = "") -> None:
    """Summary JSON, per-epoch CSV and the demand-versus-served scatter CSV."""
    store.save_json(f"{prefix}report.json", report.summary())
    store.save_frame(f"{prefix}epochs.csv", report.epoch_frame())
    store.save_frame(f"{prefix}scatter.csv", report.scatter_frame())


def simulate(
    instance: ProblemInstance,
    policy: str,
    store: ArtifactStore,
    seed: int = 0,
    **options: Any,
) -> tuple[dict[str, SimulationReport], Optional[ComparisonMetrics]]:
    """Simulate one policy, or every policy plus the comparison for ``policy="all"``."""
    if policy == "all":
        reports, comparison = run_comparison(instance, seed, **options)
        for name, report in reports.items():
            write_report(store, report, prefix=f"{name}/")
        store.save_frame("comparison.csv", comparison_frame(reports))
        if comparison is not None:
            store.save_json("comparison.json", comparison.as_dict())
        return reports, comparison
    report = run_policy(instance, Policy(policy), seed, **options)
    write_report(store, report)
    return {report.policy: report}, None


# Experiments -----------------------------------------------------------------


class ExperimentConfig(BaseModel):
    """Sweep parameters, read from YAML or built from CLI flags."""

    model_config = ConfigDict(extra="forbid")

    name: Literal["main-stations", "runtime-sweep", "ratio-sweep"]
    seeds: list[int] = Field(default_factory=lambda: [0])
    stations: int = Field(default=30, ge=1, description="Base stations for main-stations and ratio-sweep")
    clusters: int = Field(default=6, ge=1)
    sizes: list[int] = Field(default_factory=lambda: [5, 10, 15, 20, 25, 30])
    axis: Literal["main-stations", "vehicles", "trailers"] = "main-stations"
    ratios: list[float] = Field(default_factory=lambda: [2.0, 3.0, 5.0, 10.0])
    horizon: int = Field(default=4, ge=1)
    time_limit_s: float = Field(default=300.0, gt=0.0)
    simulate: bool = Field(default=True, description="Report simulated profit in main-stations rows")
    synthetic: dict[str, Any] = Field(default_factory=dict, description="Extra SyntheticConfig fields")

    @classmethod
    def from_yaml(cls, path: Path) -> "ExperimentConfig":
        with open(path) as f:
            data = yaml.safe_load(f) or {}
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"invalid experiment config {path}: {e.error_count()} error(s)", path=str(path)) from e

    def instance(self, n_stations: int, seed: int, **overrides: Any) -> ProblemInstance:
        values = {"n_stations": n_stations, "horizon": self.horizon, "seed": seed, **self.synthetic, **overrides}
        return generate_synthetic(SyntheticConfig(**values))

    def params(self) -> LddParams:
        return LddParams(time_limit_s=self.time_limit_s)


def _map(fn: Callable, items: Iterable, jobs: int) -> list:
    items = list(items)
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _clustered_feasible(plan: ClusteredPlan) -> bool:
    """Reduced vehicle plan and every cluster trailer plan pass the constraint check."""
    red = plan.reduction
    if plan.vehicle_plan is not None and check_solution(red.reduced, plan.vehicle_plan.solution):
        return False
    return all(not check_solution(red.subinstances[c], sol) for c, sol in plan.trailer_plans.items())


def _main_stations_row(job: tuple[ExperimentConfig, int]) -> dict[str, Any]:
    config, seed = job
    instance = config.instance(config.stations, seed)
    params = config.params()

    clustered = solve_clustered(instance, config.clusters, seed, params)
    with timed(f"flat LDD on '{instance.name}'", logger) as flat_timing:
        flat = run_ldd(instance, params)
    row: dict[str, Any] = {
        "instance": instance.name,
        "seed": seed,
        "runtime_with_ms": clustered.wall_time,
        "runtime_without_ms": flat_timing.seconds,
        "planned_with_ms": clustered.planned_value,
        "planned_without_ms": flat.primal_value,
        "feasible_with_ms": _clustered_feasible(clustered),
        "feasible_without_ms": not check_solution(instance, flat.solution),
    }
    if config.simulate:
        with_ms = run_policy(instance, Policy.DRRPVT, seed, Planner.CLUSTERED, clusters=config.clusters, params=params)
        without_ms = run_policy(instance, Policy.DRRPVT, seed, Planner.LDD, params=params)
        row["profit_with_ms"] = with_ms.profit
        row["profit_without_ms"] = without_ms.profit
    return row


def _runtime_row(job: tuple[ExperimentConfig, int, int]) -> dict[str, Any]:
    config, n, seed = job
    instance = config.instance(n, seed)
    params = config.params()
    limits = SolveLimits(time_limit_s=config.time_limit_s)

    with timed(f"MILP on {n} stations", logger) as milp_timing:
        exact = solve_exact(instance, OperatingMode.JOINT, limits)
    with timed(f"LDD on {n} stations", logger) as ldd_timing:
        ldd = run_ldd(instance, params)
    return {
        "stations": n,
        "seed": seed,
        "milp_seconds": milp_timing.seconds,
        "milp_completed": exact.result.status is SolveStatus.OPTIMAL,
        "milp_profit": exact.value,
        "ldd_seconds": ldd_timing.seconds,
        "ldd_profit": ldd.primal_value,
        "ldd_gap": ldd.gap,
        "ldd_converged": ldd.converged,
    }


def _ratio_row(job: tuple[ExperimentConfig, float, int]) -> dict[str, Any]:
    config, ratio, seed = job
    n = config.stations
    value = max(1, round(n / ratio))
    clusters = config.clusters
    overrides: dict[str, Any] = {}
    if config.axis == "main-stations":
        clusters = min(value, n)
    elif config.axis == "vehicles":
        overrides["n_vehicles"] = value
    else:
        overrides["n_trailers"] = value
    instance = config.instance(n, seed, **overrides)
    report = run_policy(instance, Policy.DRRPVT, seed, Planner.CLUSTERED, clusters=clusters, params=config.params())
    return {
        "axis": config.axis,
        "ratio": ratio,
        "value": value,
        "seed": seed,
        "profit": report.profit,
        "lost_demand": report.lost,
    }


@dataclass
class ExperimentResult:
    name: str
    table: pd.DataFrame
    summary: dict[str, Any] = field(default_factory=dict)


def runtime_crossover(table: pd.DataFrame) -> Optional[int]:
    """Smallest station count at which the MILP did not finish within its limit."""
    unfinished = table.loc[~table["milp_completed"].astype(bool), "stations"]
    return int(unfinished.min()) if len(unfinished) else None


def largest_completed(table: pd.DataFrame) -> Optional[dict[str, Any]]:
    """Mean MILP and LDD seconds at the largest station count where every MILP finished."""
    by_size = table.groupby("stations")
    completed = [n for n, rows in by_size if rows["milp_completed"].astype(bool).all()]
    if not completed:
        return None
    rows = by_size.get_group(max(completed))
    milp, ldd = float(rows["milp_seconds"].mean()), float(rows["ldd_seconds"].mean())
    return {"stations": int(max(completed)), "milp_seconds": milp, "ldd_seconds": ldd, "ldd_faster": ldd < milp}


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Run a named sweep; rows are computed in parallel across instances."""
    logger.info(f"experiment {config.name}: seeds {config.seeds}, jobs {jobs}")
    if config.name == "main-stations":
        if config.clusters > config.stations:
            raise ConfigError("more main stations than stations", clusters=config.clusters, stations=config.stations)
        rows = _map(_main_stations_row, [(config, s) for s in config.seeds], jobs)
        table = pd.DataFrame(rows)
        summary = {
            "mean_runtime_with_ms": float(table["runtime_with_ms"].mean()),
            "mean_runtime_without_ms": float(table["runtime_without_ms"].mean()),
        }
    elif config.name == "runtime-sweep":
        jobs_ = [(config, n, s) for n in sorted(config.sizes) for s in config.seeds]
        table = pd.DataFrame(_map(_runtime_row, jobs_, jobs))
        summary = {"crossover_stations": runtime_crossover(table), "largest_completed": largest_completed(table)}
    else:
        if any(r <= 0 for r in config.ratios):
            raise ConfigError("ratios must be positive", ratios=config.ratios)
        jobs_ = [(config, r, s) for r in config.ratios for s in config.seeds]
        table = pd.DataFrame(_map(_ratio_row, jobs_, jobs))
        summary = {"axis": config.axis, "points": len(config.ratios)}
    return ExperimentResult(name=config.name, table=table, summary=summary)
