"""Solution contracts: decision tensors for one planning horizon."""

from typing import Annotated, Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, PlainValidator


def _to_array(value: Any) -> np.ndarray:
    arr = np.array(value, dtype=float)
    arr.setflags(write=False)
    return arr


FloatArray = Annotated[
    np.ndarray,
    PlainValidator(_to_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]

# Field name -> index sets, in storage order. S stations, V vehicles,
# W trailers, T epochs; T1 is T + 1 (inventories include the end state).
TENSOR_AXES: dict[str, tuple[str, ...]] = {
    "x": ("S", "S", "T"),
    "y_plus": ("S", "V", "T"),
    "y_minus": ("S", "V", "T"),
    "z": ("S", "S", "V", "T"),
    "a_plus": ("S", "W", "T"),
    "a_minus": ("S", "W", "T"),
    "b": ("S", "S", "W", "T"),
    "d_sharp": ("S", "T1"),
    "d_star": ("V", "T1"),
    "sigma": ("V", "S", "T"),
    "task_values": ("S", "S", "T"),
}


def tensor_shapes(n_stations: int, n_vehicles: int, n_trailers: int, horizon: int) -> dict[str, tuple[int, ...]]:
    """Expected shape of every Solution tensor."""
    sizes = {"S": n_stations, "V": n_vehicles, "W": n_trailers, "T": horizon, "T1": horizon + 1}
    return {name: tuple(sizes[a] for a in axes) for name, axes in TENSOR_AXES.items()}


class Solution(BaseModel):
    """All decision variables over the horizon.

    ``d_sharp`` and ``d_star`` include epoch 0 (the initial state) through
    epoch T. ``sigma[v][s][t]`` is 1 when vehicle v idles at s during t.
    ``task_values`` records the trailer task values the plan was priced with.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x: FloatArray = Field(..., description="Hired-bike flow x[s][s'][t]")
    y_plus: FloatArray = Field(..., description="Vehicle pickups y+[s][v][t]")
    y_minus: FloatArray = Field(..., description="Vehicle dropoffs y-[s][v][t]")
    z: FloatArray = Field(..., description="Vehicle move indicator z[s][s'][v][t]")
    a_plus: FloatArray = Field(..., description="Trailer pickups a+[s][w][t]")
    a_minus: FloatArray = Field(..., description="Trailer dropoffs a-[s][w][t]")
    b: FloatArray = Field(..., description="Trailer task indicator b[s][s'][w][t]")
    d_sharp: FloatArray = Field(..., description="Station inventories d#[s][t], t = 0..T")
    d_star: FloatArray = Field(..., description="Vehicle loads d*[v][t], t = 0..T")
    sigma: FloatArray = Field(..., description="Vehicle idle indicator sigma[v][s][t]")
    task_values: FloatArray = Field(..., description="Trailer task values P^[s][s'][t]")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Solution):
            return NotImplemented
        return all(
            getattr(self, name).shape == getattr(other, name).shape
            and np.array_equal(getattr(self, name), getattr(other, name))
            for name in TENSOR_AXES
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        """(stations, vehicles, trailers, horizon)."""
        s, v, t = self.y_plus.shape
        return s, v, self.a_plus.shape[1], t

    def with_changes(self, **changes: Any) -> "Solution":
        """Copy with some tensors replaced."""
        values = {name: getattr(self, name) for name in TENSOR_AXES}
        values.update(changes)
        return Solution(**values)

    def mutable(self) -> dict[str, np.ndarray]:
        """Writable copies of every tensor."""
        return {name: np.array(getattr(self, name), dtype=float) for name in TENSOR_AXES}

    @classmethod
    def zeros(cls, n_stations: int, n_vehicles: int, n_trailers: int, horizon: int) -> "Solution":
        shapes = tensor_shapes(n_stations, n_vehicles, n_trailers, horizon)
        return cls(**{name: np.zeros(shape) for name, shape in shapes.items()})

    def vehicle_moves(self) -> list[tuple[int, int, int, int]]:
        """(s, s', v, t) for every active move indicator."""
        return [tuple(int(i) for i in idx) for idx in np.argwhere(self.z > 0.5)]

    def trailer_tasks(self) -> list[tuple[int, int, int, int]]:
        """(s, s', w, t) for every active trailer task."""
        return [tuple(int(i) for i in idx) for idx in np.argwhere(self.b > 0.5)]


class ConstraintViolation(BaseModel):
    """One violated constraint row."""

    model_config = ConfigDict(frozen=True)

    constraint_id: str = Field(..., description="C1 .. C15")
    location: dict[str, int] = Field(
        default_factory=dict, description="Indices such as s, s2, v, w, t"
    )
    magnitude: float = Field(..., gt=0.0, description="Amount by which the row is violated")
    detail: Optional[str] = Field(default=None, description="Which part of the constraint failed")
