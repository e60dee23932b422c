"""Bounded mixed-integer linear program container and solve results."""

from dataclasses import dataclass, field
from functools import cached_property
from enum import Enum
from typing import Any, Iterable, Iterator, Optional, Sequence

import numpy as np
from scipy import sparse

from drrpvt.config import settings


class Sense(str, Enum):
    """Objective direction."""

    MAX = "max"
    MIN = "min"


class Relation(str, Enum):
    """Constraint row relation."""

    LE = "<="
    EQ = "=="
    GE = ">="


class SolveStatus(str, Enum):
    """Outcome of an LP or MILP solve."""

    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    TIME_LIMIT = "TIME_LIMIT"
    NODE_LIMIT = "NODE_LIMIT"


@dataclass(frozen=True, eq=False)
class MilpProblem:
    """A bounded MILP: optimize c.x + offset s.t. rows of A, lo <= x <= hi.

    ``relations`` holds one ``Relation`` per row of ``A``. All bounds are
    finite; integer variables must have integer-valued bounds.
    """

    c: np.ndarray
    A: sparse.csr_matrix
    relations: tuple[Relation, ...]
    rhs: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    integrality: np.ndarray
    sense: Sense = Sense.MAX
    offset: float = 0.0
    var_names: tuple[str, ...] = ()
    row_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        n = self.c.shape[0]
        m = self.rhs.shape[0]
        if self.A.shape != (m, n):
            raise ValueError(f"A has shape {self.A.shape}, expected {(m, n)}")
        if len(self.relations) != m:
            raise ValueError(f"{len(self.relations)} relations for {m} rows")
        for label, arr in (("lo", self.lo), ("hi", self.hi), ("integrality", self.integrality)):
            if arr.shape != (n,):
                raise ValueError(f"{label} has shape {arr.shape}, expected {(n,)}")
        if not (np.isfinite(self.lo).all() and np.isfinite(self.hi).all()):
            raise ValueError("all variable bounds must be finite")
        if np.any(self.lo > self.hi):
            bad = int(np.argmax(self.lo > self.hi))
            raise ValueError(f"variable {self._name(bad)} has lo > hi")
        ints = self.integrality
        if np.any(ints & ((self.lo != np.round(self.lo)) | (self.hi != np.round(self.hi)))):
            raise ValueError("integer variables need integer-valued bounds")
        if self.var_names and len(self.var_names) != n:
            raise ValueError("var_names length does not match the variable count")
        if self.row_names and len(self.row_names) != m:
            raise ValueError("row_names length does not match the row count")

    # Construction -------------------------------------------------------------

    @classmethod
    def from_rows(
        cls,
        c: Sequence[float],
        rows: Iterable[tuple[Sequence[float], Relation | str, float]],
        lo: Sequence[float],
        hi: Sequence[float],
        integrality: Optional[Sequence[bool]] = None,
        sense: Sense | str = Sense.MAX,
    ) -> "MilpProblem":
        """Build from dense coefficient rows; convenient for small problems."""
        c_arr = np.asarray(c, dtype=float)
        n = c_arr.shape[0]
        coeffs, relations, rhs = [], [], []
        for row, relation, value in rows:
            coeffs.append(np.asarray(row, dtype=float))
            relations.append(Relation(relation))
            rhs.append(float(value))
        A = sparse.csr_matrix(np.vstack(coeffs)) if coeffs else sparse.csr_matrix((0, n))
        ints = np.zeros(n, dtype=bool) if integrality is None else np.asarray(integrality, dtype=bool)
        return cls(
            c=c_arr,
            A=A,
            relations=tuple(relations),
            rhs=np.asarray(rhs, dtype=float),
            lo=np.asarray(lo, dtype=float),
            hi=np.asarray(hi, dtype=float),
            integrality=ints,
            sense=Sense(sense),
        )

    def with_bounds(self, lo: np.ndarray, hi: np.ndarray) -> "MilpProblem":
        """Same problem with replaced variable bounds."""
        return MilpProblem(
            c=self.c,
            A=self.A,
            relations=self.relations,
            rhs=self.rhs,
            lo=np.asarray(lo, dtype=float),
            hi=np.asarray(hi, dtype=float),
            integrality=self.integrality,
            sense=self.sense,
            offset=self.offset,
            var_names=self.var_names,
            row_names=self.row_names,
        )

    def relaxed(self) -> "MilpProblem":
        """LP relaxation (integrality dropped)."""
        return MilpProblem(
            c=self.c,
            A=self.A,
            relations=self.relations,
            rhs=self.rhs,
            lo=self.lo,
            hi=self.hi,
            integrality=np.zeros_like(self.integrality),
            sense=self.sense,
            offset=self.offset,
            var_names=self.var_names,
            row_names=self.row_names,
        )

    # Queries --------------------------------------------------------------------

    @property
    def n_vars(self) -> int:
        return int(self.c.shape[0])

    @property
    def n_rows(self) -> int:
        return int(self.rhs.shape[0])

    @property
    def n_integer(self) -> int:
        return int(self.integrality.sum())

    @property
    def n_free(self) -> int:
        """Variables whose bounds leave room to move."""
        return int(np.count_nonzero(self.hi > self.lo))

    def constraints(self) -> Iterator[tuple[dict[int, float], Relation, float]]:
        """Rows as (sparse coefficients, relation, rhs)."""
        for i in range(self.n_rows):
            start, end = self.A.indptr[i], self.A.indptr[i + 1]
            coeffs = {int(j): float(v) for j, v in zip(self.A.indices[start:end], self.A.data[start:end])}
            yield coeffs, self.relations[i], float(self.rhs[i])

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.c @ x + self.offset)

    @cached_property
    def relation_codes(self) -> np.ndarray:
        """-1 for <=, 0 for ==, +1 for >=, per row."""
        lookup = {Relation.LE: -1, Relation.EQ: 0, Relation.GE: 1}
        return np.array([lookup[r] for r in self.relations], dtype=int)

    def row_violations(self, x: np.ndarray) -> np.ndarray:
        """Non-negative violation per row at x."""
        diff = self.A @ x - self.rhs
        codes = self.relation_codes
        return np.where(
            codes < 0, np.maximum(diff, 0.0), np.where(codes > 0, np.maximum(-diff, 0.0), np.abs(diff))
        )

    def max_violation(self, x: np.ndarray) -> float:
        """Largest row or bound violation at x."""
        bound = float(np.max(np.maximum(self.lo - x, x - self.hi), initial=0.0))
        rows = float(np.max(self.row_violations(x), initial=0.0))
        return max(0.0, bound, rows)

    def is_feasible(self, x: np.ndarray, tol: float | None = None, int_tol: float | None = None) -> bool:
        tol = settings.FEASIBILITY_TOL * 10 if tol is None else tol
        int_tol = settings.INTEGRALITY_TOL if int_tol is None else int_tol
        if self.max_violation(x) > tol:
            return False
        xi = x[self.integrality]
        return bool(np.all(np.abs(xi - np.round(xi)) <= int_tol))

    def _name(self, j: int) -> str:
        return self.var_names[j] if self.var_names else f"x{j}"

    def to_json_dict(self) -> dict[str, Any]:
        """Debug dump used by ``--dump-milp``."""
        return {
            "sense": self.sense.value,
            "n_vars": self.n_vars,
            "n_rows": self.n_rows,
            "objective": self.c.tolist(),
            "offset": self.offset,
            "bounds": [[float(a), float(b)] for a, b in zip(self.lo, self.hi)],
            "integrality": [bool(v) for v in self.integrality],
            "var_names": list(self.var_names),
            "constraints": [
                {
                    "name": self.row_names[i] if self.row_names else f"r{i}",
                    "coefficients": {str(j): v for j, v in coeffs.items()},
                    "relation": relation.value,
                    "rhs": rhs,
                }
                for i, (coeffs, relation, rhs) in enumerate(self.constraints())
            ],
        }


@dataclass(frozen=True)
class SolveLimits:
    """Termination limits for branch-and-bound."""

    time_limit_s: float = field(default_factory=lambda: settings.MILP_TIME_LIMIT_S)
    node_limit: int = field(default_factory=lambda: settings.MILP_NODE_LIMIT)
    gap_tol: float = field(default_factory=lambda: settings.GAP_TOL)


@dataclass(frozen=True, eq=False)
class LpResult:
    """Outcome of an LP solve."""

    status: SolveStatus
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    iterations: int = 0


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Outcome of a MILP solve.

    For MAX problems ``best_bound >= incumbent_value`` whenever both exist.
    """

    status: SolveStatus
    incumbent: Optional[np.ndarray]
    incumbent_value: Optional[float]
    best_bound: Optional[float]
    node_count: int
    wall_time: float
    backend: str = "native"

    @property
    def has_incumbent(self) -> bool:
        return self.incumbent is not None

    @property
    def gap(self) -> Optional[float]:
        if self.incumbent_value is None or self.best_bound is None:
            return None
        return abs(self.best_bound - self.incumbent_value)

    def summary(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "incumbent_value": self.incumbent_value,
            "best_bound": self.best_bound,
            "node_count": self.node_count,
            "wall_time": self.wall_time,
            "backend": self.backend,
        }
