"""Exact solves of the full formulation."""

from dataclasses import dataclass
from typing import Optional

from drrpvt.contracts.instance import OperatingMode, ProblemInstance
from drrpvt.contracts.solution import Solution
from drrpvt.errors import SolverNumericalError
from drrpvt.milp import SolveLimits, SolveResult, SolveStatus, solve_milp
from drrpvt.model.formulation import Objective, VarLayout, build_milp, decode
from drrpvt.util.logging import get_logger

logger = get_logger("model.exact")


@dataclass(frozen=True, eq=False)
class ExactResult:
    """Decoded incumbent of a full-formulation solve."""

    solution: Solution
    value: float
    result: SolveResult

    @property
    def optimal(self) -> bool:
        return self.result.status is SolveStatus.OPTIMAL


def solve_exact(
    instance: ProblemInstance,
    mode: OperatingMode = OperatingMode.JOINT,
    limits: Optional[SolveLimits] = None,
    backend: Optional[str] = None,
) -> ExactResult:
    """Solve the full MILP and decode its incumbent.

    The all-zero plan is feasible for every valid instance, so a missing
    incumbent means the solver gave up before finding one.
    """
    layout = VarLayout(instance, mode, Objective.FULL)
    problem = build_milp(instance, mode)
    result = solve_milp(problem, limits, backend)
    if not result.has_incumbent:
        raise SolverNumericalError(
            f"no incumbent for instance '{instance.name}' ({result.status.value})",
            instance=instance.name,
            mode=OperatingMode(mode).value,
            status=result.status.value,
        )
    solution = decode(layout, result.incumbent)
    logger.info(
        f"{OperatingMode(mode).value} solve of '{instance.name}': {result.status.value}, "
        f"profit {result.incumbent_value:.4f} in {result.wall_time:.2f}s ({result.backend})"
    )
    return ExactResult(solution=solution, value=float(result.incumbent_value), result=result)
