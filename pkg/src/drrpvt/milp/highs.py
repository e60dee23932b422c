"""HiGHS backend through scipy.optimize."""

import time
from typing import Optional

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from drrpvt.errors import SolverNumericalError
from drrpvt.milp.problem import LpResult, MilpProblem, Sense, SolveLimits, SolveResult, SolveStatus
from drrpvt.util.logging import get_logger

logger = get_logger("milp.highs")


def _row_bounds(problem: MilpProblem) -> tuple[np.ndarray, np.ndarray]:
    codes = problem.relation_codes
    lb = np.where(codes < 0, -np.inf, problem.rhs)
    ub = np.where(codes > 0, np.inf, problem.rhs)
    return lb, ub


def solve_milp_highs(problem: MilpProblem, limits: Optional[SolveLimits] = None) -> SolveResult:
    """Solve with HiGHS; statuses and values follow ``solve_milp_native``."""
    limits = limits or SolveLimits()
    sign = -1.0 if problem.sense is Sense.MAX else 1.0
    start = time.perf_counter()

    constraints = []
    if problem.n_rows:
        lb, ub = _row_bounds(problem)
        constraints.append(LinearConstraint(problem.A, lb, ub))

    res = milp(
        c=sign * problem.c,
        constraints=constraints,
        integrality=problem.integrality.astype(int),
        bounds=Bounds(problem.lo, problem.hi),
        options={
            "time_limit": limits.time_limit_s,
            "node_limit": limits.node_limit,
            "mip_rel_gap": limits.gap_tol,
            "disp": False,
        },
    )
    wall = time.perf_counter() - start
    nodes = int(getattr(res, "mip_node_count", 0) or 0)

    if res.status == 2:
        return SolveResult(SolveStatus.INFEASIBLE, None, None, None, nodes, wall, backend="highs")
    if res.status not in (0, 1):
        raise SolverNumericalError("HiGHS failed", status=int(res.status), message=str(res.message))

    incumbent = None
    value = None
    if res.x is not None:
        incumbent = np.clip(np.asarray(res.x, dtype=float), problem.lo, problem.hi)
        incumbent[problem.integrality] = np.round(incumbent[problem.integrality])
        value = problem.objective_value(incumbent)

    dual = getattr(res, "mip_dual_bound", None)
    bound = None
    if dual is not None and np.isfinite(dual):
        bound = sign * float(dual) + problem.offset
    elif res.status == 0:
        bound = value
    if bound is not None and value is not None:
        bound = max(bound, value) if problem.sense is Sense.MAX else min(bound, value)

    if res.status == 0:
        status = SolveStatus.OPTIMAL if incumbent is not None else SolveStatus.INFEASIBLE
    else:
        # scipy reports time and node limits with the same code
        status = SolveStatus.TIME_LIMIT if wall >= limits.time_limit_s else SolveStatus.NODE_LIMIT

    logger.debug(f"highs {status.value}: value={value} bound={bound} nodes={nodes} time={wall:.3f}s")
    return SolveResult(status, incumbent, value, bound, nodes, wall, backend="highs")


def solve_lp_highs(problem: MilpProblem) -> LpResult:
    """LP relaxation through ``linprog(method="highs")``."""
    sign = -1.0 if problem.sense is Sense.MAX else 1.0
    codes = problem.relation_codes
    A = problem.A
    le = codes < 0
    ge = codes > 0
    eq = codes == 0
    A_ub = None
    b_ub = None
    if (le | ge).any():
        rows = np.flatnonzero(le | ge)
        flip = np.where(ge[rows], -1.0, 1.0)
        A_ub = A[rows].multiply(flip[:, None]).tocsr()
        b_ub = problem.rhs[rows] * flip
    A_eq = A[np.flatnonzero(eq)] if eq.any() else None
    b_eq = problem.rhs[eq] if eq.any() else None

    res = linprog(
        sign * problem.c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=np.column_stack([problem.lo, problem.hi]),
        method="highs",
    )
    if res.status == 2:
        return LpResult(status=SolveStatus.INFEASIBLE)
    if res.status != 0:
        raise SolverNumericalError("HiGHS LP failed", status=int(res.status), message=str(res.message))
    x = np.clip(np.asarray(res.x, dtype=float), problem.lo, problem.hi)
    return LpResult(status=SolveStatus.OPTIMAL, x=x, value=problem.objective_value(x), iterations=int(res.nit))
