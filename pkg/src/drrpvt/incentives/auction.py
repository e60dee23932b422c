"""Sealed-bid reverse auction for trailer tasks under a budget.

Each task goes to its lowest bidder at the second-lowest bid, capped by
the task value. Tasks are screened in decreasing value order and skipped
once their payment no longer fits in the remaining budget. Neither the
winner's payment nor the budget screen depends on the winner's own bid,
so bidding one's true cost is a dominant strategy.
"""

from collections import defaultdict
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from drrpvt.config import settings
from drrpvt.contracts.auction import Allocation, Award, Bid, TrailerTask
from drrpvt.contracts.instance import ProblemInstance
from drrpvt.contracts.plan import EpochPlan
from drrpvt.errors import BudgetExceededError, ConfigError
from drrpvt.util.logging import get_logger

logger = get_logger("incentives")

BUDGET_EPS = 1e-9


def allocate_tasks(tasks: Sequence[TrailerTask], bids: Sequence[Bid], budget: float) -> Allocation:
    """Allocate tasks to bidders within ``budget``."""
    known = {t.id for t in tasks}
    by_task: dict[str, list[Bid]] = defaultdict(list)
    for bid in bids:
        if bid.task not in known:
            raise ConfigError(f"bid from {bid.bidder} references unknown task {bid.task}", task=bid.task)
        by_task[bid.task].append(bid)

    remaining = budget
    awards: list[Award] = []
    for task in sorted(tasks, key=lambda t: (-t.value, t.id)):
        ranked = sorted(by_task[task.id], key=lambda b: (b.amount, b.bidder))
        if not ranked or ranked[0].amount > task.value:
            awards.append(Award(task=task.id, reason="no bid within task value"))
            continue
        payment = ranked[1].amount if len(ranked) >= 2 else task.value
        payment = min(payment, task.value)
        if payment > remaining + BUDGET_EPS:
            awards.append(Award(task=task.id, reason="budget exhausted"))
            continue
        remaining -= payment
        awards.append(Award(task=task.id, winner=ranked[0].bidder, payment=payment))

    allocation = settle(awards, budget)
    logger.debug(
        f"auction: {len(allocation.allocated)}/{len(tasks)} tasks allocated, "
        f"paid {allocation.total_paid:.4f} of {budget:.4f}"
    )
    return allocation


def settle(awards: Sequence[Award], budget: float) -> Allocation:
    """Allocation for ``awards``; paying out more than ``budget`` is an error."""
    total = sum(a.payment for a in awards)
    if total > budget + BUDGET_EPS:
        raise BudgetExceededError(f"auction pays {total:.6g} against a budget of {budget:.6g}", total=total, budget=budget)
    return Allocation(awards=list(awards), total_paid=total, budget=budget)


def generate_bids(
    tasks: Sequence[TrailerTask],
    n_users: Optional[int] = None,
    seed: int = 0,
    low: Optional[float] = None,
    high: Optional[float] = None,
) -> list[Bid]:
    """Truthful bids: every user bids a cost drawn from U[low, high] x task value."""
    n_users = settings.AUCTION_USERS if n_users is None else n_users
    low = settings.AUCTION_COST_LOW if low is None else low
    high = settings.AUCTION_COST_HIGH if high is None else high
    rng = np.random.default_rng(seed)
    bids = []
    for task in tasks:
        factors = rng.uniform(low, high, size=n_users)
        for u, factor in enumerate(factors):
            bids.append(Bid(bidder=f"user{u}", task=task.id, amount=float(factor * task.value)))
    return bids


def tasks_from_plan(plan: EpochPlan, instance: ProblemInstance, epoch: Optional[int] = None) -> list[TrailerTask]:
    """Auctionable tasks for the plan's trailer actions."""
    epoch = plan.epoch if epoch is None else epoch
    tasks = []
    for action in plan.trailers:
        if action.quantity < 1:
            continue
        tasks.append(
            TrailerTask(
                id=f"e{epoch}-w{action.trailer}",
                origin=instance.stations[action.origin].id,
                destination=instance.stations[action.destination].id,
                epoch=epoch,
                quantity=action.quantity,
                value=action.value,
                trailer=instance.trailers[action.trailer].id,
            )
        )
    return tasks


def allocation_frame(allocation: Allocation) -> pd.DataFrame:
    """task_id, winner, payment per task."""
    return pd.DataFrame(
        {
            "task_id": [a.task for a in allocation.awards],
            "winner": [a.winner or "" for a in allocation.awards],
            "payment": [a.payment for a in allocation.awards],
        }
    )
