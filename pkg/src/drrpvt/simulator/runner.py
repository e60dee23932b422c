"""Rolling-horizon simulation of a policy over one demand scenario."""

import time
from typing import Optional

import numpy as np

from drrpvt.contracts.instance import ProblemInstance
from drrpvt.demand import DemandModel, SamplingMode, sample_scenario
from drrpvt.incentives import allocate_tasks, generate_bids, tasks_from_plan
from drrpvt.ldd import LddParams
from drrpvt.milp import SolveLimits
from drrpvt.simulator.engine import repair_plan, step
from drrpvt.simulator.metrics import ComparisonMetrics, SimulationReport, compare_metrics
from drrpvt.simulator.policies import Planner, Policy, PolicyPlanner
from drrpvt.simulator.state import SystemState
from drrpvt.util.logging import get_logger

logger = get_logger("simulator.runner")


def realized_demand(instance: ProblemInstance, seed: int, sampling: SamplingMode | str = SamplingMode.POISSON) -> np.ndarray:
    """Integer departures for the whole horizon, sampled around the instance's demand."""
    scenario = sample_scenario(DemandModel.from_instance(instance), seed, sampling)
    return np.rint(scenario.array).astype(int)


def run_policy(
    instance: ProblemInstance,
    policy: Policy | str,
    seed: int = 0,
    planner: Planner | str = Planner.CLUSTERED,
    clusters: Optional[int] = None,
    window: Optional[int] = None,
    params: Optional[LddParams] = None,
    limits: Optional[SolveLimits] = None,
    sampling: SamplingMode | str = SamplingMode.POISSON,
    realized: Optional[np.ndarray] = None,
    n_users: Optional[int] = None,
    jobs: int = 1,
) -> SimulationReport:
    """Simulate ``policy`` epoch by epoch.

    Each epoch the policy plans from the current state, the plan is clipped
    to the state, trailer tasks are auctioned off within the remaining
    budget, and only allocated tasks are executed. The scenario and the bids
    depend on ``seed`` alone, so policies run with the same seed face the
    same demand.
    """
    policy = Policy(policy)
    T = instance.horizon
    if realized is None:
        realized = realized_demand(instance, seed, sampling)
    planner_ = PolicyPlanner(policy, planner, clusters, seed, window, params, limits, jobs)
    bid_seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(max(T, 1))]
    economics = instance.economics

    state = SystemState.initial(instance)
    budget_left = economics.budget
    epochs, service = [], []
    for t in range(T):
        start = time.perf_counter()
        epoch_budget = economics.budget if economics.budget_per_epoch else budget_left
        plan = repair_plan(state, planner_.plan(instance, state, epoch_budget), instance)
        plan_seconds = time.perf_counter() - start

        tasks = tasks_from_plan(plan, instance, t)
        payment = 0.0
        allocated = 0
        if tasks:
            allocation = allocate_tasks(tasks, generate_bids(tasks, n_users, bid_seeds[t]), epoch_budget)
            winners = {a.task for a in allocation.allocated}
            kept = [action for task, action in zip(tasks, plan.trailers) if task.id in winners]
            plan = plan.model_copy(update={"trailers": kept})
            payment = allocation.total_paid
            allocated = len(kept)
            if not economics.budget_per_epoch:
                budget_left = max(0.0, budget_left - payment)

        state, metrics, records = step(state, plan, realized[:, :, t], instance, payment)
        epochs.append(
            metrics.model_copy(
                update={"tasks_offered": len(tasks), "tasks_allocated": allocated, "plan_seconds": plan_seconds}
            )
        )
        service.extend(records)
        logger.debug(
            f"{policy.value} epoch {t}: served {metrics.served}, lost {metrics.lost}, "
            f"moved {metrics.bikes_moved}, paid {payment:.3f}"
        )

    report = SimulationReport(policy=policy.value, instance=instance.name, seed=seed, epochs=epochs, service=service)
    logger.info(
        f"{policy.value} on '{instance.name}' (seed {seed}): profit {report.profit:.3f}, "
        f"lost demand {report.lost}, planning {report.plan_seconds:.2f}s"
    )
    return report


def run_comparison(
    instance: ProblemInstance,
    seed: int = 0,
    policies: Optional[list[Policy]] = None,
    **options,
) -> tuple[dict[str, SimulationReport], Optional[ComparisonMetrics]]:
    """Run several policies on one shared scenario.

    Comparison ratios are computed when the joint policy and both
    single-resource baselines are among ``policies``.
    """
    policies = [Policy(p) for p in (policies or list(Policy))]
    realized = realized_demand(instance, seed, options.pop("sampling", SamplingMode.POISSON))
    reports = {p.value: run_policy(instance, p, seed, realized=realized, **options) for p in policies}

    needed = (Policy.DRRPVT.value, Policy.DRRPV.value, Policy.DRRPT.value)
    if not all(p in reports for p in needed):
        return reports, None
    vt, v, tr = (reports[p] for p in needed)
    comparison = compare_metrics(vt.profit, v.profit, tr.profit, vt.lost, v.lost, tr.lost)
    return reports, comparison
