"""Versioned JSON interchange for instances and solutions."""

import json
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError

from drrpvt.contracts.instance import ProblemInstance
from drrpvt.contracts.solution import Solution
from drrpvt.errors import InstanceFormatError, InstanceParseError, InstanceSchemaError, InstanceValidationError
from drrpvt.util.canonical_json import canonical_dumps
from drrpvt.util.logging import get_logger

logger = get_logger("ingest.io")

INSTANCE_SCHEMA = "drrpvt-instance/1"
SOLUTION_SCHEMA = "drrpvt-solution/1"


def _dumps(model: BaseModel, schema: str) -> str:
    return canonical_dumps({"schema": schema, **model.model_dump(mode="json")})


def instance_to_json(instance: ProblemInstance) -> str:
    """Canonical text of an instance: sorted keys, 9 significant digits."""
    return _dumps(instance, INSTANCE_SCHEMA)


def solution_to_json(solution: Solution) -> str:
    return _dumps(solution, SOLUTION_SCHEMA)


def _parse(text: str, path: str | None) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        offset = len(text[: e.pos].encode("utf-8"))
        raise InstanceParseError(f"invalid JSON at byte {offset}: {e.msg}", offset, path) from e


def _payload(data: Any, schema: str, model: type[BaseModel]) -> dict[str, Any]:
    if not isinstance(data, dict):
        raise InstanceFormatError(f"top level must be a JSON object, found {type(data).__name__}")
    found = data.get("schema")
    if found != schema:
        raise InstanceSchemaError(found, schema)
    unknown = sorted(set(data) - set(model.model_fields) - {"schema"})
    if unknown:
        raise InstanceFormatError(f"unknown field(s): {', '.join(unknown)}", fields=unknown)
    return {k: v for k, v in data.items() if k != "schema"}


def _validate(model: type[BaseModel], payload: dict[str, Any], what: str):
    try:
        return model.model_validate(payload)
    except ValidationError as e:
        extra = [".".join(str(p) for p in err["loc"]) for err in e.errors() if err["type"] == "extra_forbidden"]
        if extra:
            raise InstanceFormatError(f"unknown field(s): {', '.join(extra)}", fields=extra) from e
        raise InstanceValidationError(
            f"invalid {what}: {e.error_count()} error(s)",
            errors=[f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()],
        ) from e


def instance_from_json(text: str, path: str | None = None) -> ProblemInstance:
    return _validate(ProblemInstance, _payload(_parse(text, path), INSTANCE_SCHEMA, ProblemInstance), "instance")


def load_instance(path: Path) -> ProblemInstance:
    """Read an instance file, checking schema version, fields and invariants."""
    text = Path(path).read_text(encoding="utf-8")
    instance = instance_from_json(text, str(path))
    logger.debug(f"loaded instance '{instance.name}' from {path}")
    return instance


def save_instance(instance: ProblemInstance, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(instance_to_json(instance), encoding="utf-8")
    return path


def load_solution(path: Path) -> Solution:
    text = Path(path).read_text(encoding="utf-8")
    return _validate(Solution, _payload(_parse(text, str(path)), SOLUTION_SCHEMA, Solution), "solution")


def save_solution(solution: Solution, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(solution_to_json(solution), encoding="utf-8")
    return path
