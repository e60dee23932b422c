"""Solve, simulate and experiment pipelines used by the CLI."""

from drrpvt.orchestrator.pipeline import (
    ExperimentConfig,
    ExperimentResult,
    SolveOutcome,
    SolverKind,
    largest_completed,
    run_experiment,
    runtime_crossover,
    simulate,
    solve_instance,
    write_report,
    write_solve_artifacts,
)

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "SolveOutcome",
    "SolverKind",
    "largest_completed",
    "run_experiment",
    "runtime_crossover",
    "simulate",
    "solve_instance",
    "write_report",
    "write_solve_artifacts",
]
