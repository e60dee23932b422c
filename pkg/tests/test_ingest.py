"""Tests for station ingestion, synthetic instances and the JSON format."""

import json

import numpy as np
import pytest

from drrpvt.demand import DemandModel, fit_empirical
from drrpvt.errors import (
    ConfigError,
    InstanceFormatError,
    InstanceParseError,
    InstanceSchemaError,
    InstanceValidationError,
    SchemaError,
)
from drrpvt.ingest import (
    INSTANCE_SCHEMA,
    SyntheticConfig,
    build_instance,
    generate_synthetic,
    instance_from_json,
    instance_to_json,
    load_instance,
    load_solution,
    read_stations,
    save_instance,
    save_solution,
)
from drrpvt.model import solve_exact
from drrpvt.util.canonical_json import canonical_dumps, round_sig

HEADER = "id,name,latitude,longitude,capacity\n"


class TestReadStations:
    """Station CSV parsing."""

    def test_header_only(self, tmp_path):
        path = tmp_path / "stations.csv"
        path.write_text(HEADER)
        records, diagnostics = read_stations(path)
        assert records == [] and diagnostics == []

    def test_single_row(self, tmp_path):
        path = tmp_path / "stations.csv"
        path.write_text(HEADER + "A32,Kendall,42.3625,-71.0843,19\n")
        records, _ = read_stations(path)
        assert len(records) == 1
        station = records[0]
        assert (station.id, station.name, station.latitude, station.longitude, station.capacity) == (
            "A32",
            "Kendall",
            42.3625,
            -71.0843,
            19,
        )

    def test_invalid_capacity(self, tmp_path):
        """A non-numeric capacity rejects the row and reports its line."""
        path = tmp_path / "stations.csv"
        path.write_text(HEADER + "a,,42.0,-71.0,abc\nb,,42.0,-71.0,5\n")
        records, diagnostics = read_stations(path)
        assert [r.id for r in records] == ["b"]
        assert diagnostics[0].code == "invalid_row"
        assert diagnostics[0].context["row"] == 2

    def test_duplicate_id(self, tmp_path):
        """The first row with an id wins."""
        path = tmp_path / "stations.csv"
        path.write_text(HEADER + "a,,42.0,-71.0,5\na,,43.0,-70.0,9\n")
        records, diagnostics = read_stations(path)
        assert [r.capacity for r in records] == [5]
        assert diagnostics[0].code == "duplicate_station"

    def test_missing_column(self, tmp_path):
        path = tmp_path / "stations.csv"
        path.write_text("id,latitude,longitude\n")
        with pytest.raises(SchemaError) as excinfo:
            read_stations(path)
        assert excinfo.value.column == "capacity"

    def test_mapping(self, tmp_path):
        path = tmp_path / "stations.csv"
        path.write_text("station_id,lat,lon,docks\nx,42.0,-71.0,7\n")
        records, _ = read_stations(path, {"station_id": "id", "lat": "latitude", "lon": "longitude", "docks": "capacity"})
        assert records[0].capacity == 7


class TestSynthetic:
    """Generated instances."""

    def test_default_counts(self):
        instance = generate_synthetic(SyntheticConfig())
        assert (instance.n_stations, instance.n_vehicles, instance.n_trailers) == (60, 2, 7)
        assert instance.horizon == 12
        assert instance.name == "synthetic-60s-seed0"
        assert [s.id for s in instance.stations[:2]] == ["s0", "s1"]

    def test_no_stations(self):
        with pytest.raises(ConfigError):
            generate_synthetic(SyntheticConfig(n_stations=0))

    def test_same_seed_same_text(self):
        config = SyntheticConfig(n_stations=10, seed=8)
        assert instance_to_json(generate_synthetic(config)) == instance_to_json(generate_synthetic(config))

    def test_seeds_differ(self):
        a = generate_synthetic(SyntheticConfig(n_stations=10, seed=1))
        b = generate_synthetic(SyntheticConfig(n_stations=10, seed=2))
        assert instance_to_json(a) != instance_to_json(b)

    def test_invariants(self, small_synthetic):
        """Symmetric distances, half-full docks and non-negative demand."""
        assert np.allclose(small_synthetic.D, small_synthetic.D.T)
        assert (small_synthetic.F >= 0).all()
        for station in small_synthetic.stations:
            assert station.initial_bikes <= station.capacity

    def test_invalid_ranges(self):
        with pytest.raises(ValueError):
            SyntheticConfig(capacity_range=(5, 2))

    def test_build_from_records(self, tmp_path):
        """Station records and fitted demand assemble into an instance."""
        path = tmp_path / "stations.csv"
        path.write_text(HEADER + "a,,42.0,-71.0,10\nb,,42.01,-71.0,6\n")
        records, _ = read_stations(path)
        demand = fit_empirical([], ["a", "b"], epoch_minutes=60, day_window=(7, 10))
        instance = build_instance(records, demand, SyntheticConfig(n_vehicles=1, n_trailers=1), name="city")
        assert instance.name == "city"
        assert instance.horizon == 3
        assert [s.initial_bikes for s in instance.stations] == [5, 3]

    def test_build_rejects_mismatched_stations(self, tmp_path):
        path = tmp_path / "stations.csv"
        path.write_text(HEADER + "a,,42.0,-71.0,10\n")
        records, _ = read_stations(path)
        with pytest.raises(ConfigError):
            build_instance(records, fit_empirical([], ["zzz"]))


class TestInstanceJson:
    """Versioned interchange format."""

    def test_round_trip(self, small_synthetic, tmp_path):
        """Loading a saved instance gives back the same canonical text."""
        path = save_instance(small_synthetic, tmp_path / "instance.json")
        loaded = load_instance(path)
        assert instance_to_json(loaded) == path.read_text()
        assert np.allclose(loaded.F, small_synthetic.F)

    def test_schema_tag(self, tiny_instance):
        assert json.loads(instance_to_json(tiny_instance))["schema"] == INSTANCE_SCHEMA

    def test_unknown_field(self, tiny_instance):
        data = json.loads(instance_to_json(tiny_instance))
        data["colour"] = "red"
        with pytest.raises(InstanceFormatError) as excinfo:
            instance_from_json(json.dumps(data))
        assert excinfo.value.context["fields"] == ["colour"]

    def test_unknown_nested_field(self, tiny_instance):
        data = json.loads(instance_to_json(tiny_instance))
        data["stations"][0]["colour"] = "red"
        with pytest.raises(InstanceFormatError):
            instance_from_json(json.dumps(data))

    def test_truncated_file(self, tiny_instance):
        """The parse error points inside the text."""
        text = instance_to_json(tiny_instance)
        truncated = text[: len(text) // 2]
        with pytest.raises(InstanceParseError) as excinfo:
            instance_from_json(truncated)
        assert 0 < excinfo.value.byte_offset <= len(truncated.encode("utf-8"))

    def test_schema_mismatch(self, tiny_instance):
        data = json.loads(instance_to_json(tiny_instance))
        data["schema"] = "drrpvt-instance/99"
        with pytest.raises(InstanceSchemaError) as excinfo:
            instance_from_json(json.dumps(data))
        assert excinfo.value.found == "drrpvt-instance/99"

    def test_invariant_violation(self, tiny_instance):
        """Bikes above capacity are a validation error, not a format error."""
        data = json.loads(instance_to_json(tiny_instance))
        data["stations"][0]["initial_bikes"] = 99
        with pytest.raises(InstanceValidationError):
            instance_from_json(json.dumps(data))

    def test_solution_round_trip(self, tiny_instance, tmp_path):
        solution = solve_exact(tiny_instance).solution
        loaded = load_solution(save_solution(solution, tmp_path / "solution.json"))
        assert np.array_equal(loaded.x, solution.x)
        assert np.array_equal(loaded.z, solution.z)
        assert np.allclose(loaded.task_values, solution.task_values)

    def test_instance_from_model(self, tiny_instance):
        """DemandModel.from_instance keeps the station order."""
        assert DemandModel.from_instance(tiny_instance).station_ids == ["s0", "s1"]


class TestCanonicalJson:
    """Deterministic rendering."""

    def test_sorted_keys_and_precision(self):
        text = canonical_dumps({"b": 1.0 / 3.0, "a": [1, 2]}, indent=0)
        assert text == '{"a":[1,2],"b":0.333333333}\n'

    def test_negative_zero(self):
        assert canonical_dumps(-0.0, indent=0) == "0\n"

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            canonical_dumps(float("nan"))

    def test_round_sig(self):
        assert round_sig(1.0 / 3.0) == 0.333333333
