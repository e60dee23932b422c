"""Canonical JSON rendering: sorted keys, floats at 9 significant digits."""

import json
import math
from typing import Any

import numpy as np

FLOAT_FORMAT = ".9g"


def _render(value: Any, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    close = "\n" + " " * (indent * level) if indent else ""

    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, np.ndarray):
        value = value.tolist()

    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite float {value!r} has no JSON form")
        text = format(value, FLOAT_FORMAT)
        # -0 and 0 render the same
        return "0" if text in ("-0", "0") else text
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k), ensure_ascii=False)}:{' ' if indent else ''}"
            f"{_render(value[k], indent, level + 1)}"
            for k in sorted(value, key=str)
        ]
        return "{" + ",".join(items) + close + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        # Numeric leaf rows stay on one line
        if indent and all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in value):
            return "[" + ",".join(_render(v, 0, 0) for v in value) + "]"
        items = [f"{pad}{_render(v, indent, level + 1)}" for v in value]
        return "[" + ",".join(items) + close + "]"
    raise TypeError(f"type {type(value).__name__} is not JSON serializable")


def canonical_dumps(value: Any, indent: int = 1) -> str:
    """Render a JSON-compatible value canonically.

    Keys are sorted at every level and floats are written with 9 significant
    digits, so equal values always produce byte-identical text.
    """
    return _render(value, indent, 0) + "\n"


def round_sig(value: float, digits: int = 9) -> float:
    """Round a float to the precision canonical JSON keeps."""
    return float(format(float(value), f".{digits}g"))
