"""Output storage for command artifacts."""

import json
from pathlib import Path
from typing import Any, Optional, Sequence

import pandas as pd
from pydantic import BaseModel

from drrpvt import __version__
from drrpvt.contracts.instance import ProblemInstance
from drrpvt.contracts.solution import Solution
from drrpvt.ingest.instance_io import instance_to_json, solution_to_json
from drrpvt.util.canonical_json import canonical_dumps
from drrpvt.util.hashing import hash_file, hash_inputs


class ArtifactStore:
    """Writes the artifacts of one command under a deterministic directory.

    Layout::

      <output_dir>/<command>/
        metadata.json
        instance.json, solution.json, ...   (canonical JSON)
        *.csv                               (pandas)

    Re-running a command with the same arguments overwrites the same files.
    Every write returns its path; ``written`` lists them in order.
    """

    def __init__(self, output_dir: Path, command: str):
        """Initialize the store.

        Args:
            output_dir: Base directory for all commands
            command: Subdirectory name, usually the CLI command
        """
        self.command = command
        self.root = Path(output_dir) / command
        self.root.mkdir(parents=True, exist_ok=True)
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        path = self.root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def _record(self, path: Path) -> Path:
        if path not in self.written:
            self.written.append(path)
        return path

    def save_metadata(
        self,
        arguments: dict[str, Any],
        seed: Optional[int] = None,
        input_path: Optional[Path | Sequence[Optional[Path]]] = None,
    ) -> Path:
        """Command, arguments, seed and the SHA-256 of the input file.

        Several inputs (stations, trips, mapping) get one combined hash.
        """
        if isinstance(input_path, (list, tuple)):
            inputs = [str(p) for p in input_path if p is not None]
            input_hash = hash_inputs(input_path)
        elif input_path:
            inputs = str(input_path)
            input_hash = hash_file(Path(input_path))
        else:
            inputs, input_hash = None, None
        metadata = {
            "command": self.command,
            "arguments": {k: str(v) if isinstance(v, Path) else v for k, v in arguments.items()},
            "seed": seed,
            "input": inputs,
            "input_hash": input_hash,
            "version": __version__,
        }
        return self.save_json("metadata.json", metadata)

    def save_json(self, name: str, data: Any) -> Path:
        """Save a dict, list or pydantic model as canonical JSON."""
        if isinstance(data, BaseModel):
            data = data.model_dump(mode="json")
        path = self.path(name)
        path.write_text(canonical_dumps(data), encoding="utf-8")
        return self._record(path)

    def save_text(self, name: str, content: str) -> Path:
        path = self.path(name)
        path.write_text(content, encoding="utf-8")
        return self._record(path)

    def save_instance(self, instance: ProblemInstance, name: str = "instance.json") -> Path:
        return self.save_text(name, instance_to_json(instance))

    def save_solution(self, solution: Solution, name: str = "solution.json") -> Path:
        return self.save_text(name, solution_to_json(solution))

    def save_frame(self, name: str, frame: pd.DataFrame) -> Path:
        path = self.path(name)
        frame.to_csv(path, index=False, float_format="%.9g")
        return self._record(path)


def list_artifacts(directory: Path) -> list[Path]:
    """JSON and CSV files under a run directory, sorted by path."""
    directory = Path(directory)
    return sorted(p for p in directory.rglob("*") if p.is_file() and p.suffix in (".json", ".csv"))


def read_metadata(directory: Path) -> Optional[dict[str, Any]]:
    path = Path(directory) / "metadata.json"
    if not path.exists():
        return None
    with open(path) as f:
        return json.load(f)
