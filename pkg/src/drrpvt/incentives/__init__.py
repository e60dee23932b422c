"""Trailer task valuation hand-off and the budget-feasible auction."""

from drrpvt.incentives.auction import allocate_tasks, allocation_frame, generate_bids, settle, tasks_from_plan

__all__ = ["allocate_tasks", "allocation_frame", "generate_bids", "settle", "tasks_from_plan"]
