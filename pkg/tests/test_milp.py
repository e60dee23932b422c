"""Tests for the LP engine, branch-and-bound and the enumeration oracle."""

import numpy as np
import pytest

from drrpvt.config import settings
from drrpvt.errors import ConfigError
from drrpvt.milp import (
    MilpProblem,
    SolveLimits,
    SolveResult,
    SolveStatus,
    enumerate_milp,
    resolve_backend,
    solve_lp,
    solve_milp,
)
from drrpvt.model import build_milp


def knapsack() -> MilpProblem:
    """Values 6, 10, 12; weights 1, 2, 3; capacity 5."""
    return MilpProblem.from_rows(
        c=[6, 10, 12],
        rows=[([1, 2, 3], "<=", 5)],
        lo=[0, 0, 0],
        hi=[1, 1, 1],
        integrality=[True, True, True],
        sense="max",
    )


class TestSimplex:
    """Bounded two-phase simplex."""

    def test_single_bound(self):
        """max x s.t. x <= 3, 0 <= x <= 10."""
        problem = MilpProblem.from_rows(c=[1], rows=[([1], "<=", 3)], lo=[0], hi=[10])
        result = solve_lp(problem)
        assert result.status is SolveStatus.OPTIMAL
        assert result.x[0] == pytest.approx(3.0)
        assert result.value == pytest.approx(3.0)

    def test_infeasible(self):
        """x >= 1 and x <= 0 cannot both hold."""
        problem = MilpProblem.from_rows(c=[1], rows=[([1], ">=", 1), ([1], "<=", 0)], lo=[0], hi=[10])
        assert solve_lp(problem).status is SolveStatus.INFEASIBLE

    def test_two_variables(self):
        """max 3x + 2y s.t. x + y <= 4, x <= 2 -> (2, 2), value 10."""
        problem = MilpProblem.from_rows(
            c=[3, 2], rows=[([1, 1], "<=", 4), ([1, 0], "<=", 2)], lo=[0, 0], hi=[100, 100]
        )
        result = solve_lp(problem)
        assert result.x.tolist() == pytest.approx([2.0, 2.0])
        assert result.value == pytest.approx(10.0)

    def test_equality_and_minimization(self):
        """min x + 2y s.t. x + y == 3, y >= 1 -> (2, 1), value 4."""
        problem = MilpProblem.from_rows(
            c=[1, 2], rows=[([1, 1], "==", 3), ([0, 1], ">=", 1)], lo=[0, 0], hi=[10, 10], sense="min"
        )
        result = solve_lp(problem)
        assert result.x.tolist() == pytest.approx([2.0, 1.0])
        assert result.value == pytest.approx(4.0)

    def test_matches_highs_on_formulation(self, tiny_instance):
        """The LP relaxation of the tiny instance agrees with HiGHS."""
        from drrpvt.milp import solve_lp_highs

        relaxed = build_milp(tiny_instance).relaxed()
        assert solve_lp(relaxed).value == pytest.approx(solve_lp_highs(relaxed).value, abs=1e-6)


class TestBranchAndBound:
    """Native branch-and-bound."""

    def test_knapsack(self):
        """Best subset is items 2 and 3 for 22."""
        result = solve_milp(knapsack(), backend="native")
        assert result.status is SolveStatus.OPTIMAL
        assert result.incumbent_value == pytest.approx(22.0)
        assert np.round(result.incumbent).tolist() == [0.0, 1.0, 1.0]

    def test_integral_relaxation(self):
        """No branching when the LP optimum is already integral."""
        problem = MilpProblem.from_rows(c=[1], rows=[([1], "<=", 3)], lo=[0], hi=[10], integrality=[True])
        lp = solve_lp(problem)
        result = solve_milp(problem, backend="native")
        assert result.incumbent_value == pytest.approx(lp.value)
        assert result.node_count == 1

    def test_bound_brackets_incumbent(self):
        """For a maximization the bound never falls below the incumbent."""
        result = solve_milp(knapsack(), backend="native")
        assert result.best_bound >= result.incumbent_value - 1e-9

    def test_deterministic(self):
        """Identical problem and limits give identical results."""
        a = solve_milp(knapsack(), SolveLimits(), "native")
        b = solve_milp(knapsack(), SolveLimits(), "native")
        assert a.incumbent.tolist() == b.incumbent.tolist()
        assert a.node_count == b.node_count

    def test_infeasible_milp(self):
        """An integer variable squeezed between 0.2 and 0.8 has no value."""
        problem = MilpProblem.from_rows(
            c=[1], rows=[([1], ">=", 0.2), ([1], "<=", 0.8)], lo=[0], hi=[1], integrality=[True]
        )
        result = solve_milp(problem, backend="native")
        assert result.status is SolveStatus.INFEASIBLE
        assert not result.has_incumbent

    def test_highs_backend(self):
        """HiGHS agrees on the knapsack."""
        assert solve_milp(knapsack(), backend="highs").incumbent_value == pytest.approx(22.0)

    def test_rounding_gives_early_incumbent(self):
        """max x1 + x2 s.t. 2 x1 + 2 x2 <= 3: the rounded root is an incumbent before any branching."""
        problem = MilpProblem.from_rows(
            c=[1, 1], rows=[([2, 2], "<=", 3)], lo=[0, 0], hi=[1, 1], integrality=[True, True]
        )
        result = solve_milp(problem, SolveLimits(node_limit=1), backend="native")
        assert result.status is SolveStatus.NODE_LIMIT
        assert result.incumbent_value == pytest.approx(1.0)
        assert result.best_bound == pytest.approx(1.5)
        assert solve_milp(problem, backend="native").status is SolveStatus.OPTIMAL

    def test_formulation_incumbent_within_node_budget(self, tiny_instance):
        """Diving reaches a feasible plan of the tiny instance long before proving optimality."""
        problem = build_milp(tiny_instance)
        result = solve_milp(problem, SolveLimits(node_limit=200), backend="native")
        assert result.has_incumbent
        assert problem.is_feasible(result.incumbent)


class TestBackendSelection:
    """Backend resolution."""

    def test_auto_picks_native_for_small(self):
        assert resolve_backend(knapsack(), "auto") == "native"

    def test_unknown_backend(self):
        """Unknown names are configuration errors."""
        with pytest.raises(ConfigError):
            resolve_backend(knapsack(), "cplex")

    def test_auto_picks_highs_for_large(self):
        """Above the native size limit auto goes straight to HiGHS."""
        n = settings.NATIVE_MAX_VARS + 1
        problem = MilpProblem.from_rows(c=[1] * n, rows=[([1] * n, "<=", 3)], lo=[0] * n, hi=[1] * n)
        assert resolve_backend(problem, "auto") == "highs"

    def test_auto_falls_back_to_highs(self, monkeypatch):
        """A native run that stops without proof is retried with HiGHS."""
        stalled = SolveResult(SolveStatus.TIME_LIMIT, None, None, 30.0, 10, 0.25)
        monkeypatch.setattr("drrpvt.milp.solve_milp_native", lambda problem, limits=None: stalled)
        result = solve_milp(knapsack(), backend="auto")
        assert result.backend == "highs"
        assert result.status is SolveStatus.OPTIMAL
        assert result.incumbent_value == pytest.approx(22.0)
        assert result.wall_time >= 0.25

    def test_explicit_native_has_no_fallback(self, monkeypatch):
        stalled = SolveResult(SolveStatus.TIME_LIMIT, None, None, 30.0, 10, 0.25)
        monkeypatch.setattr("drrpvt.milp.solve_milp_native", lambda problem, limits=None: stalled)
        assert solve_milp(knapsack(), backend="native") is stalled


class TestEnumerationOracle:
    """Depth-first enumeration over integer assignments."""

    def test_knapsack(self):
        assert enumerate_milp(knapsack()).incumbent_value == pytest.approx(22.0)

    def test_matches_branch_and_bound_on_formulation(self, make_instance):
        """One-epoch instance with unit capacities: the oracle and both backends agree."""
        instance = make_instance(horizon=1, vehicle_capacity=1, trailer_capacity=1, capacities=(2, 2), bikes=(2, 0))
        problem = build_milp(instance)
        oracle = enumerate_milp(problem)
        native = solve_milp(problem, backend="native")
        highs = solve_milp(problem, backend="highs")
        assert oracle.status is SolveStatus.OPTIMAL
        assert native.incumbent_value == pytest.approx(oracle.incumbent_value, abs=1e-6)
        assert highs.incumbent_value == pytest.approx(oracle.incumbent_value, abs=1e-6)
