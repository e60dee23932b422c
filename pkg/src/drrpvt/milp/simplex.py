"""Dense two-phase primal simplex for bounded LPs.

The LP is brought to standard form by fixing variables whose bounds
coincide, shifting the rest to ``0 <= x' <= u`` and writing the upper
bounds as explicit rows. Pivoting follows Bland's rule (lowest eligible
column enters, lowest basic index leaves on ratio ties), so results are
deterministic and the method cannot cycle.
"""

from typing import Optional

import numpy as np

from drrpvt.config import settings
from drrpvt.errors import SolverNumericalError
from drrpvt.milp.problem import LpResult, MilpProblem, Sense, SolveStatus
from drrpvt.util.logging import get_logger

logger = get_logger("milp.simplex")

PIVOT_TOL = 1e-9
COST_TOL = 1e-9


class _Tableau:
    """Simplex tableau with the objective row stored last.

    Row ``m`` holds reduced costs; its last entry is minus the objective.
    """

    def __init__(self, table: np.ndarray, basis: list[int], max_iterations: int):
        self.T = table
        self.basis = basis
        self.max_iterations = max_iterations
        self.iterations = 0

    @property
    def m(self) -> int:
        return self.T.shape[0] - 1

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        p = T[row, col]
        if abs(p) < PIVOT_TOL:
            raise SolverNumericalError(
                "pivot element below tolerance", row=row, column=col, value=float(p)
            )
        T[row] /= p
        column = T[:, col].copy()
        column[row] = 0.0
        T -= np.outer(column, T[row])
        self.basis[row] = col
        if not np.isfinite(T).all():
            raise SolverNumericalError("non-finite value in simplex tableau", row=row, column=col)

    def optimize(self, n_cols: int) -> None:
        """Pivot to optimality over the first ``n_cols`` columns."""
        T = self.T
        m = self.m
        while True:
            reduced = T[m, :n_cols]
            eligible = np.flatnonzero(reduced < -COST_TOL)
            if eligible.size == 0:
                return
            col = int(eligible[0])

            column = T[:m, col]
            positive = np.flatnonzero(column > PIVOT_TOL)
            if positive.size == 0:
                # Every variable is bounded, so an unbounded ray means breakdown
                raise SolverNumericalError("unbounded direction in a bounded LP", column=col)
            ratios = np.maximum(T[positive, -1], 0.0) / column[positive]
            best = ratios.min()
            ties = positive[ratios <= best + 1e-12 * max(1.0, abs(best))]
            row = int(min(ties, key=lambda i: self.basis[i]))

            self.pivot(row, col)
            self.iterations += 1
            if self.iterations > self.max_iterations:
                raise SolverNumericalError(
                    "simplex iteration limit reached", iterations=self.iterations
                )


def solve_lp(
    problem: MilpProblem,
    feasibility_tol: Optional[float] = None,
    max_iterations: Optional[int] = None,
) -> LpResult:
    """Solve the LP relaxation of ``problem`` (integrality is ignored).

    Returns an OPTIMAL vertex or an INFEASIBLE status. Numerical trouble
    raises ``SolverNumericalError``.
    """
    tol = settings.FEASIBILITY_TOL if feasibility_tol is None else feasibility_tol
    max_iterations = settings.SIMPLEX_MAX_ITERATIONS if max_iterations is None else max_iterations

    lo, hi = problem.lo, problem.hi
    free = hi - lo > tol
    free_idx = np.flatnonzero(free)
    nf = free_idx.size

    # Shift: x = lo + x', x' in [0, u] for free columns, x = lo for fixed ones
    A_csc = problem.A.tocsc()
    b = problem.rhs - A_csc @ lo
    A_free = A_csc[:, free_idx].toarray() if nf else np.zeros((problem.n_rows, 0))
    u = (hi - lo)[free_idx]
    c_min = problem.c if problem.sense is Sense.MIN else -problem.c
    c_free = c_min[free_idx]

    codes = problem.relation_codes
    nonzero = np.any(np.abs(A_free) > 0.0, axis=1) if nf else np.zeros(problem.n_rows, dtype=bool)
    scale = 1.0 + np.abs(problem.rhs)
    for i in np.flatnonzero(~nonzero):
        # Rows with no free column must already hold
        slack = b[i]
        if (codes[i] < 0 and slack < -tol * scale[i]) or (codes[i] > 0 and slack > tol * scale[i]) or (
            codes[i] == 0 and abs(slack) > tol * scale[i]
        ):
            return LpResult(status=SolveStatus.INFEASIBLE)

    x = lo.copy()
    if nf == 0:
        return LpResult(status=SolveStatus.OPTIMAL, x=x, value=problem.objective_value(x))

    keep = np.flatnonzero(nonzero)
    rows_A = np.vstack([A_free[keep], np.eye(nf)])
    rows_b = np.concatenate([b[keep], u])
    rows_code = np.concatenate([codes[keep], -np.ones(nf, dtype=int)])
    m = rows_A.shape[0]

    # Slack (+1) for <=, surplus (-1) for >=
    slack_rows = np.flatnonzero(rows_code != 0)
    n_slack = slack_rows.size
    S = np.zeros((m, n_slack))
    S[slack_rows, np.arange(n_slack)] = np.where(rows_code[slack_rows] < 0, 1.0, -1.0)

    M = np.hstack([rows_A, S])
    flip = rows_b < 0
    M[flip] *= -1.0
    rows_b = np.where(flip, -rows_b, rows_b)

    # Rows whose slack column is +1 after flipping start with that slack basic
    basis = [-1] * m
    for k, i in enumerate(slack_rows):
        if M[i, nf + k] > 0:
            basis[i] = nf + k
    need_art = [i for i in range(m) if basis[i] < 0]
    n_art = len(need_art)
    n_struct = nf + n_slack

    table = np.zeros((m + 1, n_struct + n_art + 1))
    table[:m, :n_struct] = M
    table[:m, -1] = rows_b
    for k, i in enumerate(need_art):
        table[i, n_struct + k] = 1.0
        basis[i] = n_struct + k

    tab = _Tableau(table, basis, max_iterations)

    if n_art:
        art_rows = np.array(need_art)
        table[m, :n_struct] = -table[art_rows, :n_struct].sum(axis=0)
        table[m, -1] = -table[art_rows, -1].sum()
        tab.optimize(n_struct + n_art)
        phase1 = -tab.T[m, -1]
        if phase1 > tol * (1.0 + np.abs(rows_b).max()):
            logger.debug(f"LP infeasible: phase-1 residual {phase1:.3g}")
            return LpResult(status=SolveStatus.INFEASIBLE, iterations=tab.iterations)

        # Drive artificials out of the basis; drop rows that stay redundant
        redundant = []
        for i in range(m):
            if tab.basis[i] >= n_struct:
                candidates = np.flatnonzero(np.abs(tab.T[i, :n_struct]) > PIVOT_TOL)
                if candidates.size:
                    tab.pivot(i, int(candidates[0]))
                else:
                    redundant.append(i)
        if redundant:
            keep_rows = [i for i in range(m) if i not in set(redundant)]
            tab.T = np.vstack([tab.T[keep_rows], tab.T[m:m + 1]])
            tab.basis = [tab.basis[i] for i in keep_rows]
        tab.T = np.hstack([tab.T[:, :n_struct], tab.T[:, -1:]])

    # Phase 2 objective row
    m2 = tab.m
    cost = np.concatenate([c_free, np.zeros(n_slack)])
    objective = np.zeros(n_struct + 1)
    objective[:n_struct] = cost
    for i in range(m2):
        objective -= cost[tab.basis[i]] * tab.T[i]
    tab.T[m2] = objective
    tab.optimize(n_struct)

    x_shift = np.zeros(n_struct)
    for i in range(m2):
        x_shift[tab.basis[i]] = tab.T[i, -1]
    x[free_idx] = lo[free_idx] + np.clip(x_shift[:nf], 0.0, u)

    violation = problem.max_violation(x)
    if violation > 1e3 * tol * (1.0 + float(np.abs(problem.rhs).max(initial=0.0))):
        raise SolverNumericalError(
            "simplex vertex violates the constraints", violation=violation
        )

    return LpResult(
        status=SolveStatus.OPTIMAL,
        x=x,
        value=problem.objective_value(x),
        iterations=tab.iterations,
    )
