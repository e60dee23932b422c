"""Tests for the epoch engine, policies and the simulation runner."""

import numpy as np
import pytest

from drrpvt.contracts.plan import EpochPlan, TrailerAction, VehicleAction
from drrpvt.errors import ConfigError, ConservationError, PlanInfeasibleError
from drrpvt.ldd import LddParams
from drrpvt.simulator import (
    Planner,
    Policy,
    PolicyPlanner,
    SystemState,
    TransitBatch,
    compare_metrics,
    comparison_frame,
    landed_arrivals,
    nearest_free_station,
    planning_window,
    repair_plan,
    run_comparison,
    run_policy,
    serve_departures,
    step,
    validate_plan,
)


def bare_instance(make_instance, capacities, bikes, demand=None, horizon=1):
    """No vehicles, no trailers."""
    return make_instance(
        capacities=capacities, bikes=bikes, demand=demand, horizon=horizon, n_vehicles=0, n_trailers=0
    )


class TestServeDepartures:
    """Pro-rata rationing of departures."""

    def test_enough_bikes(self):
        assert serve_departures(10, np.array([3, 3, 0])).tolist() == [3, 3, 0]

    def test_largest_remainder_ties_to_lowest_index(self):
        """Quotas 2.5 and 2.5 round to 3 and 2."""
        assert serve_departures(5, np.array([3, 3, 0])).tolist() == [3, 2, 0]

    def test_no_bikes(self):
        assert serve_departures(0, np.array([2, 1])).tolist() == [0, 0]

    def test_single_leftover(self):
        """Quotas 2.5 and 1.5 of 4 bikes: the leftover bike goes to the first destination."""
        assert serve_departures(4, np.array([5, 3, 0])).tolist() == [3, 1, 0]


class TestStep:
    """Single-epoch transitions."""

    def test_empty_station_loses_demand(self, make_instance):
        """Three requests at a station without bikes are all lost."""
        demand = np.zeros((2, 2, 1))
        demand[0, 1, 0] = 3.0
        instance = bare_instance(make_instance, (4, 4), (0, 0), demand)
        state = SystemState.initial(instance)
        _, metrics, records = step(state, EpochPlan(epoch=0), np.array([[0, 3], [0, 0]]), instance)
        assert (metrics.served, metrics.lost, metrics.demand) == (0, 3, 3)
        assert records[0].actual == 3 and records[0].served == 0

    def test_full_station_redirects_to_nearest(self, make_instance):
        """A return to a full station lands at the closest station with a free dock."""
        instance = bare_instance(make_instance, (2, 2, 2), (2, 2, 0))
        state = SystemState(
            epoch=0,
            station_bikes=[2, 2, 0],
            in_transit=[TransitBatch(destination=1, arrival_epoch=0, count=1)],
        )
        next_state, metrics, _ = step(state, EpochPlan(epoch=0), np.zeros((3, 3), dtype=int), instance)
        assert next_state.station_bikes == [2, 2, 1]
        assert metrics.redirected == 1
        assert next_state.in_transit == []

    def test_nowhere_to_land(self, make_instance):
        """With every dock taken the return stays in transit for another epoch."""
        instance = bare_instance(make_instance, (1, 1), (1, 1))
        state = SystemState(
            epoch=0,
            station_bikes=[1, 1],
            in_transit=[TransitBatch(destination=0, arrival_epoch=0, count=1)],
        )
        next_state, metrics, _ = step(state, EpochPlan(epoch=0), np.zeros((2, 2), dtype=int), instance)
        assert metrics.stranded == 1
        assert next_state.in_transit == [TransitBatch(destination=0, arrival_epoch=1, count=1)]

    def test_bikes_are_conserved(self, tiny_instance):
        """Vehicle moves, rides and returns never create or destroy bikes."""
        state = SystemState.initial(tiny_instance)
        total = state.total_bikes()
        first = EpochPlan(epoch=0, vehicles=[VehicleAction(vehicle=0, station=0, destination=1, pickup=2)])
        state, metrics, _ = step(state, first, np.array([[0, 1], [0, 0]]), tiny_instance)
        assert state.total_bikes() == total
        assert (state.station_bikes, state.vehicle_loads, state.vehicle_positions) == ([0, 0], [2], [1])
        assert metrics.served == 1
        assert metrics.routing_cost == pytest.approx(1.0)
        assert metrics.revenue == pytest.approx(2.0)

        second = EpochPlan(epoch=1, vehicles=[VehicleAction(vehicle=0, station=1, destination=1, dropoff=2)])
        state, _, _ = step(state, second, np.zeros((2, 2), dtype=int), tiny_instance)
        assert state.total_bikes() == total
        assert state.station_bikes == [0, 3]
        assert state.vehicle_loads == [0]

    def test_bike_leak_raises(self, tiny_instance, monkeypatch):
        """A step whose ride batches gain a bike fails loudly instead of logging."""
        from drrpvt.simulator import engine

        def leaky(destination, arrival_epoch, count):
            return TransitBatch(destination=destination, arrival_epoch=arrival_epoch, count=count + 1)

        monkeypatch.setattr(engine, "TransitBatch", leaky)
        state = SystemState.initial(tiny_instance)
        with pytest.raises(ConservationError) as excinfo:
            step(state, EpochPlan(epoch=0), np.array([[0, 1], [0, 0]]), tiny_instance)
        assert excinfo.value.code == "conservation_error"
        assert excinfo.value.context["before"] == state.total_bikes()
        assert excinfo.value.context["after"] == state.total_bikes() + 1

    def test_infeasible_plan_raises(self, make_instance):
        instance = make_instance(capacities=(4, 2), bikes=(3, 2))
        plan = EpochPlan(epoch=0, trailers=[TrailerAction(trailer=0, origin=0, destination=1, quantity=1)])
        with pytest.raises(PlanInfeasibleError) as excinfo:
            step(SystemState.initial(instance), plan, np.zeros((2, 2), dtype=int), instance)
        assert excinfo.value.context["epoch"] == 0


class TestPlanChecks:
    """Validation and repair against the start-of-epoch state."""

    def test_dropoff_into_full_station(self, make_instance):
        """A trailer task into a full station is flagged with its excess."""
        instance = make_instance(capacities=(4, 2), bikes=(3, 2))
        plan = EpochPlan(epoch=0, trailers=[TrailerAction(trailer=0, origin=0, destination=1, quantity=1)])
        violations = validate_plan(SystemState.initial(instance), plan, instance)
        assert [v.constraint_id for v in violations] == ["C11"]
        assert violations[0].location == {"s": 1, "t": 0}
        assert violations[0].magnitude == pytest.approx(1.0)

    def test_wrong_station(self, tiny_instance):
        """A vehicle can only operate where it stands."""
        plan = EpochPlan(epoch=0, vehicles=[VehicleAction(vehicle=0, station=1, destination=1)])
        ids = [v.constraint_id for v in validate_plan(SystemState.initial(tiny_instance), plan, tiny_instance)]
        assert "C6" in ids

    def test_repair_clips_to_state(self, make_instance):
        """Trailers into full stations are dropped and pickups are clipped to bikes and capacity."""
        instance = make_instance(capacities=(4, 2), bikes=(3, 2))
        plan = EpochPlan(
            epoch=0,
            vehicles=[VehicleAction(vehicle=0, station=0, destination=1, pickup=5)],
            trailers=[TrailerAction(trailer=0, origin=0, destination=1, quantity=1)],
        )
        state = SystemState.initial(instance)
        repaired = repair_plan(state, plan, instance)
        assert repaired.trailers == []
        assert repaired.vehicles[0].pickup == 2
        assert repaired.vehicles[0].destination == 1
        assert validate_plan(state, repaired, instance) == []

    def test_repair_keeps_feasible_plans(self, tiny_instance):
        plan = EpochPlan(
            epoch=0,
            vehicles=[VehicleAction(vehicle=0, station=0, destination=1, pickup=1)],
            trailers=[TrailerAction(trailer=0, origin=0, destination=1, quantity=2, value=1.0)],
        )
        assert repair_plan(SystemState.initial(tiny_instance), plan, tiny_instance) == plan

    def test_nearest_free_station(self):
        D = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])
        assert nearest_free_station(0, np.array([2, 1, 0]), np.array([2, 2, 2]), D) == 1
        assert nearest_free_station(0, np.array([2, 2, 2]), np.array([2, 2, 2]), D) is None


class TestPlanningWindow:
    """Instances planned from a mid-horizon state."""

    def test_window_is_cut_at_horizon(self, tiny_instance):
        state = SystemState(epoch=1, station_bikes=[1, 2], vehicle_loads=[1], vehicle_positions=[1])
        window = planning_window(tiny_instance, state, 5, budget=3.0)
        assert window.horizon == 1
        assert window.F[:, :, 0].tolist() == tiny_instance.F[:, :, 1].tolist()
        assert [s.initial_bikes for s in window.stations] == [1, 2]
        assert window.vehicles[0].initial_station == "s1"
        assert window.vehicles[0].initial_load == 1
        assert window.economics.budget == 3.0

    def test_landed_arrivals_redirect(self, make_instance):
        instance = make_instance(capacities=(1, 3), bikes=(1, 0))
        state = SystemState(
            epoch=0,
            station_bikes=[1, 0],
            vehicle_loads=[0],
            vehicle_positions=[0],
            in_transit=[TransitBatch(destination=0, arrival_epoch=0, count=2)],
        )
        assert landed_arrivals(state, instance).tolist() == [0.0, 2.0]

    def test_window_must_be_positive(self):
        with pytest.raises(ConfigError):
            PolicyPlanner(Policy.DRRPVT, window=0)


class TestRunPolicy:
    """Whole-horizon simulation."""

    def test_noop_on_zero_demand(self, zero_demand_instance):
        report = run_policy(zero_demand_instance, Policy.NOOP)
        assert report.profit == 0.0
        assert report.lost == 0
        assert len(report.epochs) == zero_demand_instance.horizon

    def test_vehicle_policy_without_vehicles_is_noop(self, make_instance):
        """Vehicle-only planning with an empty fleet matches doing nothing."""
        demand = np.zeros((2, 2, 2))
        demand[0, 1, 0] = 2.0
        demand[1, 0, 1] = 1.0
        instance = make_instance(demand=demand, n_vehicles=0)
        vehicles = run_policy(instance, Policy.DRRPV, seed=3, planner=Planner.EXACT)
        noop = run_policy(instance, Policy.NOOP, seed=3)
        assert vehicles.profit == pytest.approx(noop.profit)
        assert vehicles.lost == noop.lost

    def test_fixed_scenario(self, tiny_instance):
        """A given realization overrides sampling."""
        realized = np.zeros((2, 2, 2), dtype=int)
        realized[0, 1, 0] = 5
        report = run_policy(tiny_instance, Policy.NOOP, realized=realized)
        assert report.served == 3
        assert report.lost == 2
        assert report.revenue == pytest.approx(6.0)

    def test_frames(self, tiny_instance):
        report = run_policy(tiny_instance, Policy.NOOP, seed=1)
        assert len(report.epoch_frame()) == 2
        assert list(report.scatter_frame().columns) == ["actual", "served", "station", "epoch"]
        assert len(report.scatter_frame()) == 2 * tiny_instance.n_stations


class TestComparison:
    """Joint policy against the baselines."""

    def test_compare_metrics(self):
        metrics = compare_metrics(102.42, 100.0, 0.0, 30.0, 40.0, 30.0)
        assert metrics.gain_vehicles == pytest.approx(0.0242)
        assert metrics.gain_trailers is None
        assert metrics.lost_vehicles == pytest.approx(-0.25)
        assert metrics.lost_vehicles_reduction == pytest.approx(0.25)
        assert metrics.lost_trailers == pytest.approx(0.0)
        assert set(metrics.as_dict()) == {"G_v", "G_t", "L_v", "L_t", "L_v_reduction", "L_t_reduction"}

    def test_same_seed_same_reports(self, small_synthetic):
        """Everything but timing repeats under a fixed seed."""
        options = {"planner": Planner.EXACT, "params": LddParams(backend="highs")}
        first, first_cmp = run_comparison(small_synthetic, seed=5, **options)
        second, second_cmp = run_comparison(small_synthetic, seed=5, **options)
        assert set(first) == {"drrpvt", "drrpv", "drrpt", "noop"}

        def stable(report):
            summary = report.summary()
            summary.pop("plan_seconds")
            return summary

        for name in first:
            assert stable(first[name]) == stable(second[name])
        assert first_cmp == second_cmp
        assert len(comparison_frame(first)) == 4

    def test_policies_share_the_scenario(self, small_synthetic):
        """Every policy faces the same realized demand."""
        reports, comparison = run_comparison(
            small_synthetic, seed=2, policies=[Policy.NOOP, Policy.DRRPT],
            planner=Planner.EXACT,
            params=LddParams(backend="highs"),
        )
        assert comparison is None
        demand = [[e.demand for e in r.epochs] for r in reports.values()]
        assert demand[0] == demand[1]
