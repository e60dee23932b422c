"""Exhaustive enumeration of integer assignments.

Only meant for tiny problems, where it serves as an independent check on
branch-and-bound. Continuous variables are solved per leaf with HiGHS.
"""

import math
import time
from typing import Optional

import numpy as np

from drrpvt.errors import SolverNumericalError
from drrpvt.milp.highs import solve_lp_highs
from drrpvt.milp.problem import MilpProblem, Sense, SolveResult, SolveStatus
from drrpvt.util.logging import get_logger

logger = get_logger("milp.enumerate")

DEFAULT_MAX_LEAVES = 1_000_000


def _rows_possible(problem: MilpProblem, A_pos, A_neg, lo: np.ndarray, hi: np.ndarray, tol: float) -> bool:
    low = A_pos @ lo + A_neg @ hi
    high = A_pos @ hi + A_neg @ lo
    codes = problem.relation_codes
    rhs = problem.rhs
    too_high = (codes <= 0) & (low > rhs + tol)
    too_low = (codes >= 0) & (high < rhs - tol)
    return not (too_high.any() or too_low.any())


def enumerate_milp(
    problem: MilpProblem,
    max_leaves: int = DEFAULT_MAX_LEAVES,
    tol: float = 1e-7,
) -> SolveResult:
    """Optimal solution by depth-first search over all integer values.

    Binary variables are branched first. A branch is cut when some row can
    no longer be satisfied within the remaining bounds, or when the best
    objective the bounds allow cannot beat the incumbent.
    """
    start = time.perf_counter()
    sign = -1.0 if problem.sense is Sense.MAX else 1.0
    c_min = sign * problem.c
    A_pos = problem.A.maximum(0).tocsr()
    A_neg = problem.A.minimum(0).tocsr()

    ints = np.flatnonzero(problem.integrality)
    span = problem.hi[ints] - problem.lo[ints]
    order = [int(j) for j in ints[np.argsort(span, kind="stable")]]
    has_continuous = bool((~problem.integrality & (problem.hi > problem.lo)).any())

    best_x: Optional[np.ndarray] = None
    best_min = math.inf
    leaves = 0

    def optimistic(lo: np.ndarray, hi: np.ndarray) -> float:
        return float(np.minimum(c_min * lo, c_min * hi).sum())

    def visit(depth: int, lo: np.ndarray, hi: np.ndarray) -> None:
        nonlocal best_x, best_min, leaves
        if not _rows_possible(problem, A_pos, A_neg, lo, hi, tol):
            return
        if optimistic(lo, hi) >= best_min - 1e-12:
            return
        if depth == len(order):
            leaves += 1
            if leaves > max_leaves:
                raise SolverNumericalError("enumeration leaf limit exceeded", max_leaves=max_leaves)
            if has_continuous:
                res = solve_lp_highs(problem.with_bounds(lo, hi))
                if res.status is not SolveStatus.OPTIMAL:
                    return
                x = res.x
            else:
                x = lo.copy()
                if problem.max_violation(x) > tol:
                    return
            value_min = float(c_min @ x)
            if value_min < best_min - 1e-12:
                best_x, best_min = x.copy(), value_min
            return

        j = order[depth]
        for value in range(int(lo[j]), int(hi[j]) + 1):
            child_lo, child_hi = lo.copy(), hi.copy()
            child_lo[j] = child_hi[j] = float(value)
            visit(depth + 1, child_lo, child_hi)

    visit(0, problem.lo.copy(), problem.hi.copy())
    wall = time.perf_counter() - start
    logger.debug(f"enumeration visited {leaves} leaves in {wall:.3f}s")

    if best_x is None:
        return SolveResult(SolveStatus.INFEASIBLE, None, None, None, leaves, wall, backend="enumerate")
    value = problem.objective_value(best_x)
    return SolveResult(SolveStatus.OPTIMAL, best_x, value, value, leaves, wall, backend="enumerate")
