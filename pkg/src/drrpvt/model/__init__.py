"""Objective, constraint checker and MILP formulation."""

from drrpvt.model.constraints import check_solution, violation_summary
from drrpvt.model.exact import ExactResult, solve_exact
from drrpvt.model.formulation import (
    Objective,
    VarLayout,
    build_milp,
    decode,
    encode,
    idle_from_routes,
    variable_count,
    with_objective,
)
from drrpvt.model.objective import (
    evaluate_objective,
    objective_terms,
    reference_inventories,
    task_value_tensor,
    trailer_task_values,
    transition_fractions,
    validate_shapes,
)

__all__ = [
    "ExactResult",
    "Objective",
    "VarLayout",
    "build_milp",
    "check_solution",
    "decode",
    "encode",
    "evaluate_objective",
    "idle_from_routes",
    "objective_terms",
    "reference_inventories",
    "solve_exact",
    "task_value_tensor",
    "trailer_task_values",
    "transition_fractions",
    "validate_shapes",
    "variable_count",
    "violation_summary",
    "with_objective",
]
