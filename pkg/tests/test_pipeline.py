"""Tests for artifact storage and the solve, simulate and experiment pipelines."""

import json
import logging

import pandas as pd
import pytest

from drrpvt.artifacts import ArtifactStore, list_artifacts, read_metadata
from drrpvt.contracts.instance import OperatingMode
from drrpvt.errors import ConfigError
from drrpvt.ldd import LddParams
from drrpvt.model import solve_exact
from drrpvt.orchestrator import (
    ExperimentConfig,
    largest_completed,
    run_experiment,
    runtime_crossover,
    simulate,
    solve_instance,
    write_solve_artifacts,
)
from drrpvt.simulator import SimulationReport
from drrpvt.util.hashing import hash_file, hash_inputs
from drrpvt.util.logging import get_logger, timed


class TestArtifactStore:
    """Deterministic artifact layout."""

    def test_metadata_hashes_input(self, output_dir, tiny_instance):
        store = ArtifactStore(output_dir, "solve")
        instance_path = store.save_instance(tiny_instance)
        store.save_metadata({"solver": "milp", "instance": instance_path}, seed=3, input_path=instance_path)
        metadata = read_metadata(output_dir / "solve")
        assert metadata["command"] == "solve"
        assert metadata["seed"] == 3
        assert metadata["input_hash"] == hash_file(instance_path)
        assert metadata["arguments"]["instance"] == str(instance_path)

    def test_combined_input_hash(self, output_dir, tmp_path):
        """Several inputs share one hash; a missing optional input is skipped."""
        a, b = tmp_path / "stations.csv", tmp_path / "trips.csv"
        a.write_text("id\n")
        b.write_text("start_station\n")
        store = ArtifactStore(output_dir, "ingest")
        store.save_metadata({}, seed=0, input_path=[a, b, None])
        metadata = read_metadata(output_dir / "ingest")
        assert metadata["input"] == [str(a), str(b)]
        assert metadata["input_hash"] == hash_inputs([a, b])
        assert metadata["input_hash"] != hash_inputs([b, a])

    def test_written_paths(self, output_dir):
        store = ArtifactStore(output_dir, "report")
        a = store.save_json("a.json", {"x": 1})
        b = store.save_frame("b.csv", pd.DataFrame({"x": [1.5]}))
        store.save_json("a.json", {"x": 2})
        assert store.written == [a, b]
        assert list_artifacts(output_dir) == sorted([a, b])
        assert json.loads(a.read_text()) == {"x": 2}

    def test_missing_metadata(self, output_dir):
        assert read_metadata(output_dir) is None


class TestSolveInstance:
    """Single-shot planning."""

    def test_milp_matches_exact(self, tiny_instance):
        outcome = solve_instance(tiny_instance, "milp")
        assert outcome.objective == pytest.approx(solve_exact(tiny_instance).value)
        assert outcome.optimal
        assert outcome.violations == 0

    def test_ldd_is_feasible(self, tiny_instance):
        outcome = solve_instance(tiny_instance, "ldd", params=LddParams(max_iterations=10))
        assert outcome.violations == 0
        assert outcome.ldd is not None
        assert outcome.dual_bound >= outcome.objective - 1e-6

    def test_trailers_only_goes_exact(self, tiny_instance):
        """Nothing couples trailers to vehicles, so the MILP handles trailer-only planning."""
        outcome = solve_instance(tiny_instance, "ldd", mode=OperatingMode.TRAILERS_ONLY)
        assert outcome.solver == "milp"
        assert outcome.objective == pytest.approx(solve_exact(tiny_instance, OperatingMode.TRAILERS_ONLY).value)

    def test_clustered_artifacts(self, small_synthetic, output_dir):
        """Clustered solves write the summary, the clustering, the per-epoch plan and the solutions they came from."""
        outcome = solve_instance(small_synthetic, "clustered", params=LddParams(max_iterations=10), clusters=2)
        store = ArtifactStore(output_dir, "solve")
        write_solve_artifacts(store, outcome, small_synthetic)
        names = {p.name for p in store.written}
        solved = {f"cluster{c}_solution.json" for c in outcome.clustered.trailer_plans}
        assert len(solved) == 1
        assert names == {"summary.json", "clustering.csv", "plan.json", "main_solution.json"} | solved
        main = json.loads((store.root / "main_solution.json").read_text())
        assert len(main["x"]) == 2
        summary = json.loads((store.root / "summary.json").read_text())
        assert summary["main_stations"] == 2
        plan = json.loads((store.root / "plan.json").read_text())
        assert len(plan["epochs"]) == small_synthetic.horizon

    def test_ldd_artifacts(self, tiny_instance, output_dir):
        outcome = solve_instance(tiny_instance, "ldd", params=LddParams(max_iterations=5))
        store = ArtifactStore(output_dir, "solve")
        write_solve_artifacts(store, outcome, tiny_instance)
        trace = pd.read_csv(store.root / "gap_trace.csv")
        assert len(trace) == outcome.ldd.iterations_used
        assert (store.root / "solution.json").exists()


class TestSimulate:
    """Simulation artifacts."""

    def test_single_policy(self, zero_demand_instance, output_dir):
        store = ArtifactStore(output_dir, "simulate")
        reports, comparison = simulate(zero_demand_instance, "noop", store, seed=1)
        assert comparison is None
        assert reports["noop"].profit == 0.0
        assert {p.name for p in store.written} == {"report.json", "epochs.csv", "scatter.csv"}

    def test_all_policies(self, zero_demand_instance, output_dir):
        """Every policy gets its own directory; with zero profits the ratios are undefined."""
        store = ArtifactStore(output_dir, "simulate")
        reports, comparison = simulate(zero_demand_instance, "all", store, planner="exact")
        assert set(reports) == {"drrpvt", "drrpv", "drrpt", "noop"}
        assert (store.root / "drrpvt" / "report.json").exists()
        assert (store.root / "comparison.csv").exists()
        assert comparison is not None and comparison.gain_vehicles is None
        assert json.loads((store.root / "comparison.json").read_text())["G_v"] is None


class TestExperiments:
    """Sweep configuration and tables."""

    def test_ratio_sweep_rows(self, monkeypatch):
        """One row per ratio and seed, each from a simulated run."""
        calls = []

        def fake_run_policy(instance, policy, seed, planner, clusters=None, params=None):
            calls.append((instance.n_stations, instance.n_trailers, clusters))
            return SimulationReport(policy="drrpvt", instance=instance.name, seed=seed)

        monkeypatch.setattr("drrpvt.orchestrator.pipeline.run_policy", fake_run_policy)
        config = ExperimentConfig(name="ratio-sweep", stations=6, ratios=[3.0], axis="trailers", horizon=1)
        result = run_experiment(config)
        assert len(result.table) == 1
        row = result.table.iloc[0]
        assert (row["axis"], row["value"], row["profit"]) == ("trailers", 2, 0.0)
        assert calls == [(6, 2, config.clusters)]

    def test_main_station_axis(self, monkeypatch):
        """On the main-station axis the ratio sets the cluster count."""
        seen = []
        monkeypatch.setattr(
            "drrpvt.orchestrator.pipeline.run_policy",
            lambda instance, policy, seed, planner, clusters=None, params=None: seen.append(clusters)
            or SimulationReport(policy="drrpvt", instance=instance.name, seed=seed),
        )
        run_experiment(ExperimentConfig(name="ratio-sweep", stations=10, ratios=[2.0, 5.0], horizon=1))
        assert seen == [5, 2]

    def test_nonpositive_ratio(self):
        with pytest.raises(ConfigError):
            run_experiment(ExperimentConfig(name="ratio-sweep", ratios=[0.0]))

    def test_too_many_clusters(self):
        with pytest.raises(ConfigError):
            run_experiment(ExperimentConfig(name="main-stations", stations=4, clusters=5))

    def test_crossover(self):
        table = pd.DataFrame(
            {"stations": [5, 10, 15, 20], "milp_completed": [True, True, False, False]}
        )
        assert runtime_crossover(table) == 15
        assert runtime_crossover(table.assign(milp_completed=True)) is None

    def test_largest_completed(self):
        """Timings are compared at the largest size where every seed's MILP finished."""
        table = pd.DataFrame(
            {
                "stations": [5, 5, 10, 10, 15],
                "milp_completed": [True, True, True, True, False],
                "milp_seconds": [1.0, 3.0, 8.0, 12.0, 60.0],
                "ldd_seconds": [2.0, 2.0, 4.0, 6.0, 9.0],
            }
        )
        assert largest_completed(table) == {"stations": 10, "milp_seconds": 10.0, "ldd_seconds": 5.0, "ldd_faster": True}
        partial = table.assign(milp_completed=[True, False, True, True, False])
        assert largest_completed(partial)["stations"] == 10
        assert largest_completed(table.assign(milp_completed=False)) is None

    def test_from_yaml(self, tmp_path):
        path = tmp_path / "sweep.yaml"
        path.write_text("name: runtime-sweep\nsizes: [3, 4]\nseeds: [1, 2]\nsynthetic:\n  n_trailers: 2\n")
        config = ExperimentConfig.from_yaml(path)
        assert config.sizes == [3, 4]
        assert config.instance(3, 1).n_trailers == 2

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "sweep.yaml"
        path.write_text("name: nope\n")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_yaml(path)


class TestTimed:
    """Wall-time logging helper."""

    def test_logs_and_records(self, caplog):
        logger = get_logger("test")
        with caplog.at_level(logging.INFO, logger="drrpvt"):
            with timed("warm-up", logger) as timing:
                sum(range(1000))
        assert timing.seconds >= 0.0
        assert any(r.getMessage().startswith("warm-up took ") for r in caplog.records)

    def test_records_on_error(self):
        with pytest.raises(RuntimeError):
            with timed("failing") as timing:
                raise RuntimeError("boom")
        assert timing.seconds >= 0.0
