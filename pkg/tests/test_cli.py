"""Tests for the command-line interface."""

import json
from pathlib import Path

from typer.testing import CliRunner

from drrpvt.cli import app
from drrpvt.ingest import save_instance

runner = CliRunner()


def invoke(output_dir, *args):
    return runner.invoke(app, ["--output-dir", str(output_dir), *args])


class TestSynthAndCluster:
    """Instance generation and main stations."""

    def test_synth_writes_instance(self, output_dir):
        result = invoke(output_dir, "--seed", "4", "synth", "--stations", "8", "--horizon", "2")
        assert result.exit_code == 0, result.output
        instance = json.loads((output_dir / "synth" / "instance.json").read_text())
        assert len(instance["stations"]) == 8
        assert instance["name"] == "synthetic-8s-seed4"
        metadata = json.loads((output_dir / "synth" / "metadata.json").read_text())
        assert metadata["seed"] == 4

    def test_synth_rejects_empty_city(self, output_dir):
        result = invoke(output_dir, "synth", "--stations", "0")
        assert result.exit_code == 1
        error = json.loads((output_dir / "synth" / "error.json").read_text())
        assert error["ok"] is False
        assert error["errors"][0]["code"] == "config_error"

    def test_cluster(self, output_dir, small_synthetic, tmp_path):
        path = save_instance(small_synthetic, tmp_path / "instance.json")
        result = invoke(output_dir, "cluster", "--instance", str(path), "--k", "2")
        assert result.exit_code == 0, result.output
        lines = (output_dir / "cluster" / "clustering.csv").read_text().splitlines()
        assert lines[0] == "station_id,cluster_id,representative_flag"
        assert len(lines) == 1 + small_synthetic.n_stations


class TestSolveAndSimulate:
    """Planning and simulation commands."""

    def test_solve_milp(self, output_dir, tiny_instance, tmp_path):
        path = save_instance(tiny_instance, tmp_path / "instance.json")
        result = invoke(output_dir, "solve", "--instance", str(path), "--solver", "milp")
        assert result.exit_code == 0, result.output
        summary = json.loads((output_dir / "solve" / "summary.json").read_text())
        assert summary["solver"] == "milp"
        assert summary["violations"] == 0
        assert (output_dir / "solve" / "solution.json").exists()
        assert not (output_dir / "solve" / "milp.json").exists()

    def test_dump_milp_to_path(self, output_dir, tiny_instance, tmp_path):
        """--dump-milp takes a destination path and writes the model there."""
        path = save_instance(tiny_instance, tmp_path / "instance.json")
        dump = tmp_path / "debug" / "tiny-milp.json"
        result = invoke(output_dir, "solve", "--instance", str(path), "--solver", "milp", "--dump-milp", str(dump))
        assert result.exit_code == 0, result.output
        model = json.loads(dump.read_text())
        assert model["sense"] == "max"
        assert model["n_vars"] == len(model["var_names"]) == len(model["bounds"])
        assert len(model["constraints"]) == model["n_rows"]

    def test_solve_invalid_instance(self, output_dir, tmp_path):
        """A malformed file fails with exit code 1 and a structured error."""
        path = tmp_path / "broken.json"
        path.write_text('{"schema": "drrpvt-instance/1", "name": ')
        result = invoke(output_dir, "solve", "--instance", str(path))
        assert result.exit_code == 1
        error = json.loads((output_dir / "solve" / "error.json").read_text())
        assert error["errors"][0]["code"] == "parse_error"
        assert error["trace"]["command"] == "solve"

    def test_simulate_noop(self, output_dir, zero_demand_instance, tmp_path):
        path = save_instance(zero_demand_instance, tmp_path / "instance.json")
        result = invoke(output_dir, "simulate", "--instance", str(path), "--policy", "noop")
        assert result.exit_code == 0, result.output
        report = json.loads((output_dir / "simulate" / "report.json").read_text())
        assert report["profit"] == 0
        assert report["lost_demand"] == 0

    def test_report(self, output_dir, zero_demand_instance, tmp_path):
        path = save_instance(zero_demand_instance, tmp_path / "instance.json")
        invoke(output_dir, "simulate", "--instance", str(path), "--policy", "noop")
        result = invoke(output_dir, "report", str(output_dir / "simulate"))
        assert result.exit_code == 0, result.output


class TestExperiment:
    """Sweep command arguments."""

    def test_unknown_experiment(self, output_dir):
        result = invoke(output_dir, "experiment", "warp-speed")
        assert result.exit_code == 2

    def test_missing_name(self, output_dir):
        result = invoke(output_dir, "experiment")
        assert result.exit_code == 2

    def test_bad_config(self, output_dir, tmp_path):
        path = tmp_path / "sweep.yaml"
        path.write_text("name: runtime-sweep\nsizes: three\n")
        result = invoke(output_dir, "experiment", "--config", str(path))
        assert result.exit_code == 1
        error = json.loads((output_dir / "experiment" / "error.json").read_text())
        assert error["errors"][0]["code"] == "config_error"


class TestIngest:
    """Instance building from the demo CSVs."""

    DEMO = Path(__file__).parent.parent / "data" / "demo"

    def test_demo_dataset(self, output_dir):
        """Renamed trip columns are mapped; the trip returned before it left is rejected."""
        result = invoke(
            output_dir,
            "ingest",
            "--stations", str(self.DEMO / "stations.csv"),
            "--trips", str(self.DEMO / "trips.csv"),
            "--mapping", str(self.DEMO / "mapping.json"),
            "--window-start", "7",
            "--window-end", "10",
            "--trailers", "2",
        )
        assert result.exit_code == 0, result.output
        instance = json.loads((output_dir / "ingest" / "instance.json").read_text())
        assert len(instance["stations"]) == 6
        assert instance["horizon"] == 6
        diagnostics = json.loads((output_dir / "ingest" / "diagnostics.json").read_text())
        assert diagnostics["ok"] is True
        assert [w["context"]["row"] for w in diagnostics["warnings"]] == [17]
        assert diagnostics["data"]["fit"]["retained"] == 15
        metadata = json.loads((output_dir / "ingest" / "metadata.json").read_text())
        assert len(metadata["input"]) == 3
