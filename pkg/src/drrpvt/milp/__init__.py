"""Exact MILP solving: problem container, backends and the enumeration oracle."""

from dataclasses import replace
from typing import Optional

from drrpvt.config import settings
from drrpvt.errors import ConfigError
from drrpvt.milp.branch_and_bound import solve_milp_native
from drrpvt.milp.enumerate import enumerate_milp
from drrpvt.milp.highs import solve_lp_highs, solve_milp_highs
from drrpvt.milp.problem import (
    LpResult,
    MilpProblem,
    Relation,
    Sense,
    SolveLimits,
    SolveResult,
    SolveStatus,
)
from drrpvt.milp.simplex import solve_lp
from drrpvt.util.logging import get_logger

logger = get_logger("milp")


def resolve_backend(problem: MilpProblem, backend: Optional[str] = None) -> str:
    """Pick the concrete backend for ``problem``."""
    backend = (backend or settings.MILP_BACKEND).lower()
    if backend not in settings.backend_choices:
        raise ConfigError(f"unknown MILP backend '{backend}'", backend=backend)
    if backend == "auto":
        return "native" if problem.n_free <= settings.NATIVE_MAX_VARS else "highs"
    return backend


def solve_milp(
    problem: MilpProblem,
    limits: Optional[SolveLimits] = None,
    backend: Optional[str] = None,
) -> SolveResult:
    """Solve ``problem`` with the configured backend.

    Under ``auto`` the native solver gets ``NATIVE_TIME_LIMIT_S``; if it
    stops without proving optimality the problem goes to HiGHS with the
    remaining time.
    """
    limits = limits or SolveLimits()
    requested = (backend or settings.MILP_BACKEND).lower()
    chosen = resolve_backend(problem, backend)
    if chosen == "native" and requested == "auto":
        native_limits = replace(limits, time_limit_s=min(limits.time_limit_s, settings.NATIVE_TIME_LIMIT_S))
        result = solve_milp_native(problem, native_limits)
        if result.status not in (SolveStatus.OPTIMAL, SolveStatus.INFEASIBLE):
            remaining = max(limits.time_limit_s - result.wall_time, 1.0)
            logger.info(
                f"native branch-and-bound stopped at {result.status.value} after {result.node_count} nodes; "
                "falling back to HiGHS"
            )
            fallback = solve_milp_highs(problem, replace(limits, time_limit_s=remaining))
            result = replace(fallback, wall_time=fallback.wall_time + result.wall_time)
            chosen = "highs"
    elif chosen == "native":
        result = solve_milp_native(problem, limits)
    else:
        result = solve_milp_highs(problem, limits)
    logger.debug(
        f"{chosen}: {problem.n_vars} vars ({problem.n_free} free), {problem.n_rows} rows -> "
        f"{result.status.value} in {result.wall_time:.3f}s"
    )
    return result


__all__ = [
    "LpResult",
    "MilpProblem",
    "Relation",
    "Sense",
    "SolveLimits",
    "SolveResult",
    "SolveStatus",
    "enumerate_milp",
    "resolve_backend",
    "solve_lp",
    "solve_lp_highs",
    "solve_milp",
    "solve_milp_highs",
    "solve_milp_native",
]
