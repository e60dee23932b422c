"""Tests for the Lagrangian decomposition: slaves, multiplier update and the loop."""

import numpy as np
import pytest

from drrpvt.contracts.instance import OperatingMode
from drrpvt.errors import ConfigError
from drrpvt.ldd import (
    LddParams,
    RepositionSlave,
    extract_primal,
    routing_network,
    run_ldd,
    solve_reposition_slave,
    solve_routing_slave,
    update_duals,
)
from drrpvt.milp import SolveResult, SolveStatus, enumerate_milp
from drrpvt.model import Objective, build_milp, check_solution, solve_exact


class TestUpdateDuals:
    """Projected subgradient step."""

    def test_no_violation_keeps_alpha(self):
        """y+ + y- equal to C* times departures leaves alpha unchanged."""
        alpha = np.full((1, 1, 1), 0.3)
        y = np.ones((1, 1, 1))
        z = np.ones((1, 1, 1, 1))
        updated = update_duals(alpha, 0.5, y, y, z, np.array([2.0]))
        assert updated[0, 0, 0] == pytest.approx(0.3)

    def test_violation_raises_alpha(self):
        """Two operations without a departure and gamma 0.5 add one."""
        alpha = np.zeros((1, 1, 1))
        y_plus = np.full((1, 1, 1), 2.0)
        updated = update_duals(alpha, 0.5, y_plus, np.zeros((1, 1, 1)), np.zeros((1, 1, 1, 1)), np.array([2.0]))
        assert updated[0, 0, 0] == pytest.approx(1.0)

    def test_projection_to_zero(self):
        """Negative steps stop at zero."""
        alpha = np.full((1, 1, 1), 0.1)
        zeros = np.zeros((1, 1, 1))
        z = np.ones((1, 1, 1, 1))
        updated = update_duals(alpha, 1.0, zeros, zeros, z, np.array([1.0]))
        assert updated[0, 0, 0] == 0.0

    def test_index_order(self):
        """alpha is [station][epoch][vehicle] while y is [station][vehicle][epoch]."""
        alpha = np.zeros((2, 3, 1))
        y_plus = np.zeros((2, 1, 3))
        y_plus[1, 0, 2] = 1.0
        updated = update_duals(alpha, 1.0, y_plus, np.zeros_like(y_plus), np.zeros((2, 2, 1, 3)), np.array([1.0]))
        assert updated[1, 2, 0] == pytest.approx(1.0)
        assert updated.sum() == pytest.approx(1.0)


class TestParams:
    """Step sizes and thresholds."""

    def test_step_size_schedule(self):
        params = LddParams(gamma0=2.0, gamma_decay=10.0)
        assert params.step_size(0) == pytest.approx(2.0)
        assert params.step_size(10) == pytest.approx(1.0)

    def test_threshold(self):
        """Relative threshold with an absolute floor."""
        params = LddParams(relative_delta=0.01, absolute_delta=1e-6)
        assert params.threshold(50.0) == pytest.approx(0.5)
        assert params.threshold(0.0) == pytest.approx(1e-6)

    def test_invalid_routing_method(self):
        with pytest.raises(ValueError):
            LddParams(routing_method="dijkstra")


class TestSlaves:
    """Routing and repositioning subproblems."""

    def test_graph_and_milp_routing_agree(self, tiny_instance):
        """The shortest-path slave and the routing MILP have the same optimum."""
        rng = np.random.default_rng(7)
        for _ in range(3):
            alpha = rng.uniform(0.0, 1.5, size=(2, 2, 1))
            graph = solve_routing_slave(tiny_instance, alpha, method="graph")
            milp = solve_routing_slave(tiny_instance, alpha, method="milp", backend="highs")
            assert graph.value == pytest.approx(milp.value, abs=1e-6)

    def test_zero_multipliers_idle(self, tiny_instance):
        """With alpha = 0 and positive moving costs nobody moves."""
        result = solve_routing_slave(tiny_instance, np.zeros((2, 2, 1)), method="graph")
        assert result.value == pytest.approx(0.0)
        assert not result.z.any()

    def test_network_shape(self, tiny_instance):
        """(S x (T + 1)) station nodes plus source and sink."""
        G = routing_network(tiny_instance, np.zeros((2, 2, 1)))
        assert G.number_of_nodes() == 2 * 3 + 2

    def test_reposition_slave_zero_demand(self, zero_demand_instance):
        """Nothing to serve means nothing to gain."""
        result = solve_reposition_slave(zero_demand_instance, np.zeros((2, 2, 1)))
        assert result.value == pytest.approx(0.0)
        assert not result.x.any()

    def test_reposition_slave_bounds_profit(self, tiny_instance):
        """At alpha = 0 the slave ignores routing, so its value bounds the optimum."""
        opt = solve_exact(tiny_instance).value
        result = solve_reposition_slave(tiny_instance, np.zeros((2, 2, 1)))
        assert result.value <= -opt + 1e-6

    def test_extract_without_routes(self, tiny_instance):
        """With no vehicle moves the best plan is the trailer-only optimum."""
        primal = extract_primal(tiny_instance, np.zeros((2, 2, 1, 2)))
        trailers_only = solve_exact(tiny_instance, OperatingMode.TRAILERS_ONLY)
        assert primal.value == pytest.approx(trailers_only.value, abs=1e-6)

    def test_extract_with_optimal_routes(self, tiny_instance):
        """Fixing the optimal routes recovers the optimal profit."""
        exact = solve_exact(tiny_instance)
        primal = extract_primal(tiny_instance, exact.solution.z)
        assert primal.value == pytest.approx(exact.value, abs=1e-6)


class TestRunLdd:
    """The decomposition loop."""

    def test_zero_demand_converges_immediately(self, zero_demand_instance):
        """Both bounds are zero at the first iteration."""
        result = run_ldd(zero_demand_instance, LddParams(max_iterations=20))
        assert result.converged
        assert result.iterations_used == 1
        assert result.gap == pytest.approx(0.0)
        assert result.primal_value == pytest.approx(0.0)

    def test_bounds_sandwich_optimum(self, tiny_instance):
        """best dual <= -opt <= -best primal in the minimization frame."""
        opt = solve_exact(tiny_instance).value
        result = run_ldd(tiny_instance, LddParams(max_iterations=40))
        assert result.dual_bound <= -opt + 1e-6
        assert result.primal_value <= opt + 1e-6
        assert result.gap >= -1e-6

    def test_trace_is_monotone(self, tiny_instance):
        """Best-so-far envelopes never get worse."""
        result = run_ldd(tiny_instance, LddParams(max_iterations=15))
        frame = result.trace_frame()
        assert len(frame) == result.iterations_used
        assert frame["best_dual"].is_monotonic_increasing
        assert frame["best_primal"].is_monotonic_decreasing

    def test_parallel_matches_sequential(self, tiny_instance):
        """Running the slaves on two threads changes nothing."""
        sequential = run_ldd(tiny_instance, LddParams(max_iterations=10))
        parallel = run_ldd(tiny_instance, LddParams(max_iterations=10, parallel_slaves=True))
        assert parallel.primal_value == pytest.approx(sequential.primal_value)
        assert parallel.iterations_used == sequential.iterations_used

    def test_plan_passes_checker(self, tiny_instance):
        """The returned plan satisfies every constraint."""
        result = run_ldd(tiny_instance, LddParams(max_iterations=10))
        assert check_solution(tiny_instance, result.solution) == []

    def test_trailers_only_rejected(self, tiny_instance):
        """Trailer-only planning has nothing to decompose."""
        with pytest.raises(ConfigError):
            run_ldd(tiny_instance, mode=OperatingMode.TRAILERS_ONLY)


def vehicle_only_city(make_instance, trailer_range: float = 0.5, n_trailers: int = 1):
    """Station 1 needs two bikes in epoch 2; with short trailer range only the vehicle can bring them."""
    demand = np.zeros((3, 3, 3))
    demand[1, 2, 2] = 2.0
    return make_instance(
        capacities=(4, 4, 4),
        bikes=(4, 0, 0),
        demand=demand,
        horizon=3,
        revenue=3.0,
        trailer_range=trailer_range,
        n_trailers=n_trailers,
        name="vehicle-city",
    )


class TestSlaveProperties:
    """Structural properties of the slaves and the dual function."""

    def test_huge_multipliers_stop_vehicle_work(self, tiny_instance):
        """Operations priced far above any fare are never chosen."""
        result = solve_reposition_slave(tiny_instance, np.full((2, 2, 1), 1e6))
        assert not result.y_plus.any()
        assert not result.y_minus.any()

    def test_reposition_value_matches_enumeration(self, make_instance):
        """On a one-epoch unit-capacity instance the slave optimum equals exhaustive search."""
        instance = make_instance(horizon=1, vehicle_capacity=1, trailer_capacity=1, capacities=(2, 2), bikes=(2, 0))
        for alpha in (np.zeros((2, 1, 1)), np.full((2, 1, 1), 0.7), np.array([[[3.0]], [[0.1]]])):
            problem = build_milp(instance, objective=Objective.REPOSITION, alpha=alpha)
            oracle = enumerate_milp(problem)
            assert oracle.status is SolveStatus.OPTIMAL
            assert solve_reposition_slave(instance, alpha).value == pytest.approx(oracle.incumbent_value, abs=1e-6)

    def test_routing_respects_station_entry_limit(self, make_instance):
        """Both vehicles would like to work station 1 in epoch 1; only one may enter it."""
        instance = make_instance(capacities=(4, 4, 4), bikes=(3, 0, 0), n_vehicles=2, horizon=2)
        alpha = np.zeros((3, 2, 2))
        alpha[1, 1, :] = 5.0
        result = solve_routing_slave(instance, alpha, backend="highs")
        entries = result.z.sum(axis=(0, 2))
        assert entries.max() <= 1.0 + 1e-9
        assert result.z[:, 1, :, 0].sum() == pytest.approx(1.0)
        assert result.value < 0.0

    def test_dual_is_sum_of_slaves(self, tiny_instance):
        """The first iteration reports rho1 + rho2 at alpha = 0."""
        alpha = np.zeros((2, 2, 1))
        rho1 = solve_reposition_slave(tiny_instance, alpha).value
        rho2 = solve_routing_slave(tiny_instance, alpha).value
        result = run_ldd(tiny_instance, LddParams(max_iterations=1))
        assert result.gap_trace[0].dual == pytest.approx(rho1 + rho2)

    def test_dual_bounds_optimum(self, tiny_instance):
        """Weak duality at random multipliers."""
        opt = solve_exact(tiny_instance).value
        rng = np.random.default_rng(5)
        for _ in range(5):
            alpha = rng.uniform(0.0, 3.0, size=(2, 2, 1))
            dual = solve_reposition_slave(tiny_instance, alpha).value + solve_routing_slave(tiny_instance, alpha).value
            assert dual <= -opt + 1e-6

    def test_no_trailers_means_no_trailer_work(self, make_instance):
        """Without trailers the slave and the plan carry empty trailer tensors and match vehicle-only planning."""
        instance = vehicle_only_city(make_instance, n_trailers=0)
        assert instance.n_trailers == 0
        rep = solve_reposition_slave(instance, np.zeros((3, 3, 1)))
        assert rep.a_plus.shape == (3, 0, 3)
        assert rep.b.shape == (3, 3, 0, 3)
        result = run_ldd(instance, LddParams(max_iterations=20))
        assert result.solution.b.size == 0
        assert result.solution.a_minus.size == 0
        joint = solve_exact(instance).value
        vehicles = solve_exact(instance, OperatingMode.VEHICLES_ONLY).value
        assert joint == pytest.approx(vehicles, abs=1e-6)

    def test_stalled_slave_keeps_previous_assignment(self, tiny_instance, monkeypatch):
        """A time-limited slave with a bound but no point reuses the last assignment."""
        slave = RepositionSlave(tiny_instance)
        first = slave.solve(np.zeros((2, 2, 1)))
        stalled = SolveResult(SolveStatus.TIME_LIMIT, None, None, -7.0, 3, 0.5)
        monkeypatch.setattr("drrpvt.ldd.slaves.solve_milp", lambda *args, **kwargs: stalled)
        second = slave.solve(np.ones((2, 2, 1)))
        assert second.value == pytest.approx(-7.0)
        assert np.array_equal(second.y_plus, first.y_plus)
        assert np.array_equal(second.x, first.x)

        fresh = RepositionSlave(tiny_instance).solve(np.zeros((2, 2, 1)))
        assert fresh.value == pytest.approx(-7.0)
        assert not fresh.y_plus.any()


class TestLddQuality:
    """Decomposition against the exact optimum."""

    def test_within_one_percent(self, tiny_instance, make_instance):
        """Trailer-served, vehicle-served and mixed cities."""
        family = [tiny_instance, vehicle_only_city(make_instance), vehicle_only_city(make_instance, trailer_range=5.0)]
        for instance in family:
            opt = solve_exact(instance, backend="highs").value
            result = run_ldd(instance, LddParams(max_iterations=50))
            assert result.primal_value >= opt - 0.01 * abs(opt) - 1e-6, instance.name
            assert check_solution(instance, result.solution) == []

    def test_vehicle_city_optimum(self, make_instance):
        """Two bikes moved by vehicle and hired at fare 3, minus one unit of driving."""
        instance = vehicle_only_city(make_instance)
        assert solve_exact(instance, backend="highs").value == pytest.approx(5.0)
        result = run_ldd(instance, LddParams(max_iterations=50))
        assert result.primal_value == pytest.approx(5.0)

    def test_small_city_default_backend(self, small_synthetic):
        """A 4-station city finishes under the default backend choice and short slave limits."""
        result = run_ldd(small_synthetic, LddParams(max_iterations=20, time_limit_s=5))
        assert check_solution(small_synthetic, result.solution) == []
        assert result.dual_bound <= -result.primal_value + 1e-6
