"""Branch-and-bound over the native simplex.

The search dives depth-first until it holds an incumbent, then switches to
best-bound order. Every dive node also tries rounding its LP point and
re-solving the continuous part, which usually yields an early incumbent.
"""

import heapq
import math
import time
from typing import Optional

import numpy as np

from drrpvt.config import settings
from drrpvt.milp.problem import MilpProblem, Sense, SolveLimits, SolveResult, SolveStatus
from drrpvt.milp.simplex import solve_lp
from drrpvt.util.logging import get_logger

logger = get_logger("milp.bnb")

# (bound in the minimization frame, creation order, lo, hi, LP point)
Node = tuple[float, int, np.ndarray, np.ndarray, np.ndarray]


def most_fractional(x: np.ndarray, integrality: np.ndarray, int_tol: float) -> Optional[int]:
    """Index of the integer variable farthest from an integer, lowest index on ties."""
    if not integrality.any():
        return None
    frac = x - np.floor(x)
    distance = np.where(integrality, np.minimum(frac, 1.0 - frac), 0.0)
    j = int(np.argmax(distance))
    return j if distance[j] > int_tol else None


def round_and_fix(problem: MilpProblem, x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> Optional[np.ndarray]:
    """Round the integer part of an LP point into the node box and re-solve the rest.

    Returns a feasible assignment of ``problem`` or None.
    """
    ints = problem.integrality
    rounded = np.clip(np.round(x), lo, hi)
    fixed_lo, fixed_hi = lo.copy(), hi.copy()
    fixed_lo[ints] = rounded[ints]
    fixed_hi[ints] = rounded[ints]
    res = solve_lp(problem.with_bounds(fixed_lo, fixed_hi))
    if res.status is not SolveStatus.OPTIMAL:
        return None
    candidate = res.x.copy()
    candidate[ints] = rounded[ints]
    return candidate if problem.is_feasible(candidate) else None


def solve_milp_native(problem: MilpProblem, limits: Optional[SolveLimits] = None) -> SolveResult:
    """Solve ``problem`` exactly by branch-and-bound.

    Nodes branch on the most fractional variable. Internally everything is
    minimized; values are reported in the problem's own sense.
    """
    limits = limits or SolveLimits()
    int_tol = settings.INTEGRALITY_TOL
    sign = -1.0 if problem.sense is Sense.MAX else 1.0
    start = time.perf_counter()

    def report(status: SolveStatus, incumbent, bound_min: Optional[float], nodes: int) -> SolveResult:
        value = None if incumbent is None else problem.objective_value(incumbent)
        bound = None if bound_min is None or math.isinf(bound_min) else sign * bound_min
        if bound is not None and value is not None:
            # Keep the reported bound on the correct side of the incumbent
            bound = max(bound, value) if problem.sense is Sense.MAX else min(bound, value)
        return SolveResult(
            status=status,
            incumbent=incumbent,
            incumbent_value=value,
            best_bound=bound,
            node_count=nodes,
            wall_time=time.perf_counter() - start,
            backend="native",
        )

    root = solve_lp(problem)
    if root.status is SolveStatus.INFEASIBLE:
        return report(SolveStatus.INFEASIBLE, None, None, 0)

    seq = 0
    dive: list[Node] = [(sign * root.value, seq, problem.lo.copy(), problem.hi.copy(), root.x)]
    heap: list[Node] = []
    incumbent: Optional[np.ndarray] = None
    inc_min = math.inf
    nodes = 0
    status: Optional[SolveStatus] = None

    def offer(candidate: np.ndarray, source: str) -> None:
        nonlocal incumbent, inc_min
        value_min = sign * problem.objective_value(candidate)
        if value_min < inc_min - 1e-12:
            incumbent, inc_min = candidate, value_min
            logger.debug(f"node {nodes}: new incumbent {sign * inc_min:.6g} ({source})")

    while dive or heap:
        if time.perf_counter() - start > limits.time_limit_s:
            status = SolveStatus.TIME_LIMIT
            break
        if nodes >= limits.node_limit:
            status = SolveStatus.NODE_LIMIT
            break

        if incumbent is None:
            node = dive.pop()
        else:
            if dive:
                heap.extend(dive)
                heapq.heapify(heap)
                dive.clear()
            node = heapq.heappop(heap)
            if node[0] >= inc_min - limits.gap_tol:
                # Best-bound order: nothing left can beat the incumbent
                heap.clear()
                break
        bound, _, lo, hi, x = node
        if bound >= inc_min - limits.gap_tol:
            continue
        nodes += 1

        j = most_fractional(x, problem.integrality, int_tol)
        if j is None:
            candidate = x.copy()
            candidate[problem.integrality] = np.round(candidate[problem.integrality])
            offer(candidate, "integral LP")
            continue
        if incumbent is None:
            rounded = round_and_fix(problem, x, lo, hi)
            if rounded is not None:
                offer(rounded, "rounding")

        # The child nearer to the LP value is explored first while diving
        sides = ("up", "down") if x[j] - math.floor(x[j]) >= 0.5 else ("down", "up")
        children: list[Node] = []
        for side in sides:
            child_lo, child_hi = lo.copy(), hi.copy()
            if side == "down":
                child_hi[j] = math.floor(x[j])
            else:
                child_lo[j] = math.ceil(x[j])
            if child_lo[j] > child_hi[j]:
                continue
            res = solve_lp(problem.with_bounds(child_lo, child_hi))
            if res.status is SolveStatus.INFEASIBLE:
                continue
            child_min = sign * res.value
            if child_min >= inc_min - limits.gap_tol:
                continue
            seq += 1
            children.append((child_min, seq, child_lo, child_hi, res.x))
        if incumbent is None:
            dive.extend(reversed(children))
        else:
            for child in children:
                heapq.heappush(heap, child)

    open_min = min((node[0] for node in (*dive, *heap)), default=math.inf)
    if status is None:
        status = SolveStatus.OPTIMAL if incumbent is not None else SolveStatus.INFEASIBLE
        bound_min = None if incumbent is None else inc_min
    else:
        bound_min = min(open_min, inc_min)

    result = report(status, incumbent, bound_min, nodes)
    logger.debug(
        f"branch-and-bound {status.value}: value={result.incumbent_value} "
        f"bound={result.best_bound} nodes={nodes} time={result.wall_time:.3f}s"
    )
    return result
