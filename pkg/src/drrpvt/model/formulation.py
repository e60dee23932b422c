"""MILP formulation of the repositioning problem.

Variables are laid out block by block (x, y+, y-, z, a+, a-, b, d#, d*,
sigma); a ``VarLayout`` maps every block to a contiguous index range so
assignments can be decoded back into a ``Solution``. Inventories at epoch 0
are constants, so ``d_sharp`` and ``d_star`` blocks cover epochs 1..T.

The same builder emits the full problem and the two Lagrangian slaves:

* ``Objective.FULL``: maximize R.x - P.z - P^.b under C1-C15.
* ``Objective.REPOSITION``: minimize -R.x + alpha.(y+ + y-) + P^.b under
  C1-C5 and C9-C15 (no routing variables).
* ``Objective.ROUTING``: minimize sum z.(P - C*.alpha) under C6-C7.
"""

from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import sparse

from drrpvt.contracts.instance import OperatingMode, ProblemInstance
from drrpvt.contracts.solution import Solution, tensor_shapes
from drrpvt.errors import InstanceValidationError
from drrpvt.milp.problem import MilpProblem, Relation, Sense
from drrpvt.model.objective import task_value_tensor, transition_fractions, validate_shapes


class Objective(str, Enum):
    """Which problem ``build_milp`` emits."""

    FULL = "full"
    REPOSITION = "reposition"
    ROUTING = "routing"


BLOCK_ORDER = ("x", "y_plus", "y_minus", "z", "a_plus", "a_minus", "b", "d_sharp", "d_star", "sigma")
INTEGER_BLOCKS = frozenset({"y_plus", "y_minus", "z", "a_plus", "a_minus", "b"})


def block_names(mode: OperatingMode, objective: Objective) -> tuple[str, ...]:
    """Variable blocks present for a mode and objective."""
    if objective is Objective.ROUTING:
        if not mode.uses_vehicles:
            raise ValueError("the routing problem needs vehicles")
        return ("z", "sigma")
    present = {"x", "d_sharp"}
    if mode.uses_vehicles:
        present |= {"y_plus", "y_minus", "d_star"}
        if objective is Objective.FULL:
            present |= {"z", "sigma"}
    if mode.uses_trailers:
        present |= {"a_plus", "a_minus", "b"}
    return tuple(name for name in BLOCK_ORDER if name in present)


@dataclass(frozen=True)
class VarBlock:
    """A contiguous range of variables with a tensor shape."""

    name: str
    offset: int
    shape: tuple[int, ...]

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=int))

    @property
    def integer(self) -> bool:
        return self.name in INTEGER_BLOCKS

    def ids(self) -> np.ndarray:
        return self.offset + np.arange(self.size).reshape(self.shape)


class VarLayout:
    """Index map between MILP assignments and solution tensors."""

    def __init__(self, instance: ProblemInstance, mode: OperatingMode, objective: Objective = Objective.FULL):
        S, V, W, T = instance.n_stations, instance.n_vehicles, instance.n_trailers, instance.horizon
        if S == 0:
            raise InstanceValidationError("cannot formulate an instance without stations")
        if T == 0:
            raise InstanceValidationError("cannot formulate an instance with a zero horizon")
        self.instance = instance
        self.mode = OperatingMode(mode)
        self.objective = Objective(objective)

        shapes = tensor_shapes(S, V, W, T)
        shapes["d_sharp"] = (S, T)
        shapes["d_star"] = (V, T)
        self.blocks: dict[str, VarBlock] = {}
        offset = 0
        for name in block_names(self.mode, self.objective):
            block = VarBlock(name, offset, shapes[name])
            self.blocks[name] = block
            offset += block.size
        self.n_vars = offset

    def __contains__(self, name: str) -> bool:
        return name in self.blocks

    @cached_property
    def _ids(self) -> dict[str, np.ndarray]:
        return {name: block.ids() for name, block in self.blocks.items()}

    def ids(self, name: str) -> np.ndarray:
        """Global variable indices of a block, shaped like its tensor."""
        return self._ids[name]

    def extract(self, assignment: np.ndarray, name: str) -> np.ndarray:
        """The block's values, shaped like its tensor."""
        block = self.blocks[name]
        return np.asarray(assignment[block.offset:block.offset + block.size], dtype=float).reshape(block.shape)

    def var_names(self) -> tuple[str, ...]:
        names: list[str] = []
        for name, block in self.blocks.items():
            for idx in np.ndindex(*block.shape):
                names.append(f"{name}[{','.join(str(i) for i in idx)}]")
        return tuple(names)

    def integrality(self) -> np.ndarray:
        flags = np.zeros(self.n_vars, dtype=bool)
        for block in self.blocks.values():
            if block.integer:
                flags[block.offset:block.offset + block.size] = True
        return flags

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Variable bounds (C12 and C15)."""
        inst = self.instance
        S, V, W, T = inst.n_stations, inst.n_vehicles, inst.n_trailers, inst.horizon
        lo = np.zeros(self.n_vars)
        hi = np.zeros(self.n_vars)

        def put(name: str, upper: np.ndarray) -> None:
            if name in self.blocks:
                hi[self.ids(name).ravel()] = np.broadcast_to(upper, self.blocks[name].shape).ravel()

        put("x", inst.F)
        put("y_plus", inst.vehicle_capacity.reshape(1, V, 1))
        put("y_minus", inst.vehicle_capacity.reshape(1, V, 1))
        put("z", np.ones(1))
        put("a_plus", inst.trailer_capacity.reshape(1, W, 1))
        put("a_minus", inst.trailer_capacity.reshape(1, W, 1))
        if "b" in self.blocks:
            reachable = inst.D[:, :, None] <= inst.trailer_range[None, None, :]
            put("b", reachable[:, :, :, None].astype(float) * np.ones((S, S, W, T)))
        put("d_sharp", inst.station_capacity.reshape(S, 1))
        put("d_star", inst.vehicle_capacity.reshape(V, 1))
        put("sigma", np.ones(1))
        # Integer blocks keep integer-valued bounds
        ints = self.integrality()
        hi[ints] = np.floor(hi[ints] + 1e-9)
        return lo, hi


class _Rows:
    """Accumulates sparse constraint rows."""

    def __init__(self, n_vars: int):
        self.n_vars = n_vars
        self._rows: list[np.ndarray] = []
        self._cols: list[np.ndarray] = []
        self._vals: list[np.ndarray] = []
        self.relations: list[Relation] = []
        self.rhs: list[float] = []
        self.names: list[str] = []

    def add(self, terms: list[tuple[np.ndarray, object]], relation: Relation, rhs: float, name: str) -> None:
        i = len(self.rhs)
        for ids, coef in terms:
            ids = np.asarray(ids, dtype=int).ravel()
            if ids.size == 0:
                continue
            coef = np.asarray(coef, dtype=float)
            if coef.size == ids.size:
                vals = coef.ravel()
            elif coef.size == 1:
                vals = np.full(ids.size, float(coef.ravel()[0]))
            else:
                raise ValueError(f"{coef.size} coefficients for {ids.size} variables in row {name}")
            nonzero = vals != 0.0
            self._rows.append(np.full(int(nonzero.sum()), i))
            self._cols.append(ids[nonzero])
            self._vals.append(vals[nonzero])
        self.relations.append(relation)
        self.rhs.append(float(rhs))
        self.names.append(name)

    def matrix(self) -> sparse.csr_matrix:
        m = len(self.rhs)
        if not self._rows:
            return sparse.csr_matrix((m, self.n_vars))
        coo = sparse.coo_matrix(
            (np.concatenate(self._vals), (np.concatenate(self._rows), np.concatenate(self._cols))),
            shape=(m, self.n_vars),
        )
        return coo.tocsr()


def _empty(*_: int) -> np.ndarray:
    return np.zeros(0, dtype=int)


def _constraint_rows(layout: VarLayout, task_values: np.ndarray) -> _Rows:
    inst = layout.instance
    S, V, W, T = inst.n_stations, inst.n_vehicles, inst.n_trailers, inst.horizon
    rows = _Rows(layout.n_vars)
    has = layout.blocks.__contains__
    ids = layout.ids

    d0 = inst.initial_bikes
    cap = inst.station_capacity

    def inventory(s: int, t: int) -> tuple[np.ndarray, float]:
        """(variable ids, constant) for d#[s][t]."""
        if t == 0:
            return _empty(), float(d0[s])
        return np.array([ids("d_sharp")[s, t - 1]]), 0.0

    if layout.objective is not Objective.ROUTING:
        frac = transition_fractions(inst.F)
        x = ids("x")
        for t in range(T):
            for s in range(S):
                # C1: inventory balance
                d_ids, d_const = inventory(s, t)
                terms: list[tuple[np.ndarray, object]] = [
                    (ids("d_sharp")[s, t], 1.0),
                    (d_ids, -1.0),
                    (x[s, :, t], 1.0),
                ]
                rhs = d_const
                if t == 0:
                    rhs += float(inst.incoming_bikes[s])
                else:
                    terms.append((x[:, s, t - 1], -1.0))
                if has("y_plus"):
                    terms += [(ids("y_plus")[s, :, t], 1.0), (ids("y_minus")[s, :, t], -1.0)]
                if has("a_plus"):
                    terms += [(ids("a_plus")[s, :, t], 1.0), (ids("a_minus")[s, :, t], -1.0)]
                rows.add(terms, Relation.EQ, rhs, f"C1[s={s},t={t}]")

                # C2: hired flow follows the observed transition fractions
                for s2 in range(S):
                    if inst.F[s, s2, t] <= 0:
                        continue
                    f = float(frac[s, s2, t])
                    if t == 0:
                        rows.add([(x[s, s2, t], 1.0)], Relation.LE, f * d_const, f"C2[s={s},s2={s2},t={t}]")
                    else:
                        rows.add(
                            [(x[s, s2, t], 1.0), (d_ids, -f)], Relation.LE, 0.0, f"C2[s={s},s2={s2},t={t}]"
                        )

                # C10 / C11: pickups limited by docked bikes, dropoffs by free docks
                pick: list[tuple[np.ndarray, object]] = []
                drop: list[tuple[np.ndarray, object]] = []
                if has("y_plus"):
                    pick.append((ids("y_plus")[s, :, t], 1.0))
                    drop.append((ids("y_minus")[s, :, t], 1.0))
                if has("a_plus"):
                    pick.append((ids("a_plus")[s, :, t], 1.0))
                    drop.append((ids("a_minus")[s, :, t], 1.0))
                if pick:
                    rows.add(pick + [(d_ids, -1.0)], Relation.LE, d_const, f"C10[s={s},t={t}]")
                    rows.add(drop + [(d_ids, 1.0)], Relation.LE, float(cap[s]) - d_const, f"C11[s={s},t={t}]")

        if has("b"):
            # C4: trailer budget
            b = ids("b")
            epochs = [[t] for t in range(T)] if inst.economics.budget_per_epoch else [list(range(T))]
            for group in epochs:
                coef = task_values[:, :, group][:, :, None, :] * np.ones((1, 1, W, 1))
                block = b[:, :, :, group]
                if np.any(coef > 0):
                    label = f"C4[t={group[0]}]" if inst.economics.budget_per_epoch else "C4"
                    rows.add([(block, coef)], Relation.LE, inst.economics.budget, label)

        if has("d_star"):
            # C5: vehicle loads
            for v in range(V):
                for t in range(T):
                    terms = [
                        (ids("d_star")[v, t], 1.0),
                        (ids("y_plus")[:, v, t], -1.0),
                        (ids("y_minus")[:, v, t], 1.0),
                    ]
                    rhs = float(inst.vehicle_load[v])
                    if t > 0:
                        terms.append((ids("d_star")[v, t - 1], -1.0))
                        rhs = 0.0
                    rows.add(terms, Relation.EQ, rhs, f"C5[v={v},t={t}]")

        if has("a_plus"):
            a_plus, a_minus, b = ids("a_plus"), ids("a_minus"), ids("b")
            caps = inst.trailer_capacity
            for w in range(W):
                cw = float(caps[w])
                for t in range(T):
                    # C13: one task per trailer and epoch
                    rows.add([(b[:, :, w, t], 1.0)], Relation.LE, 1.0, f"C13[w={w},t={t}]")
                    for s in range(S):
                        # C9: pickups only at the task origin
                        rows.add(
                            [(a_plus[s, w, t], 1.0), (b[s, :, w, t], -cw)],
                            Relation.LE,
                            0.0,
                            f"C9[s={s},w={w},t={t}]",
                        )
                        # C14: a-[s] = (sum over origins of b[., s]) * (sum of a+), linearized
                        rows.add(
                            [(a_minus[s, w, t], 1.0), (b[:, s, w, t], -cw)],
                            Relation.LE,
                            0.0,
                            f"C14a[s={s},w={w},t={t}]",
                        )
                        rows.add(
                            [(a_minus[s, w, t], 1.0), (a_plus[:, w, t], -1.0)],
                            Relation.LE,
                            0.0,
                            f"C14b[s={s},w={w},t={t}]",
                        )
                        rows.add(
                            [(a_minus[s, w, t], 1.0), (a_plus[:, w, t], -1.0), (b[:, s, w, t], -cw)],
                            Relation.GE,
                            -cw,
                            f"C14c[s={s},w={w},t={t}]",
                        )

    if has("z"):
        z, sigma = ids("z"), ids("sigma")
        start = inst.vehicle_start
        for v in range(V):
            for t in range(T):
                for s in range(S):
                    # C6: vehicle flow conservation
                    terms = [(z[s, :, v, t], 1.0), (sigma[v, s, t], 1.0)]
                    if t == 0:
                        rhs = 1.0 if start[v] == s else 0.0
                    else:
                        terms += [(z[:, s, v, t - 1], -1.0), (sigma[v, s, t - 1], -1.0)]
                        rhs = 0.0
                    rows.add(terms, Relation.EQ, rhs, f"C6[v={v},s={s},t={t}]")
        if V >= 2:
            for t in range(T):
                for s in range(S):
                    # C7: at most one vehicle enters a station per epoch
                    rows.add([(z[:, s, :, t], 1.0)], Relation.LE, 1.0, f"C7[s={s},t={t}]")
        if layout.objective is Objective.FULL:
            caps = inst.vehicle_capacity
            for v in range(V):
                for t in range(T):
                    for s in range(S):
                        # C8: a vehicle operates only where it departs from
                        rows.add(
                            [
                                (ids("y_plus")[s, v, t], 1.0),
                                (ids("y_minus")[s, v, t], 1.0),
                                (z[s, :, v, t], -float(caps[v])),
                            ],
                            Relation.LE,
                            0.0,
                            f"C8[s={s},v={v},t={t}]",
                        )
    return rows


def objective_vector(
    layout: VarLayout,
    alpha: Optional[np.ndarray] = None,
    task_values: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, Sense]:
    """Objective coefficients and sense for the layout's problem."""
    inst = layout.instance
    task_values = task_value_tensor(inst) if task_values is None else task_values
    c = np.zeros(layout.n_vars)
    W = inst.n_trailers

    def put(name: str, coef: np.ndarray) -> None:
        if name in layout:
            c[layout.ids(name).ravel()] = np.broadcast_to(coef, layout.blocks[name].shape).ravel()

    if layout.objective is Objective.FULL:
        put("x", inst.R)
        put("z", -inst.P[:, :, None, None])
        put("b", -task_values[:, :, None, :] * np.ones((1, 1, W, 1)))
        return c, Sense.MAX

    S, V, T = inst.n_stations, inst.n_vehicles, inst.horizon
    alpha = np.zeros((S, T, V)) if alpha is None else np.asarray(alpha, dtype=float)
    if alpha.shape != (S, T, V):
        raise ValueError(f"alpha has shape {alpha.shape}, expected {(S, T, V)}")

    if layout.objective is Objective.REPOSITION:
        penalty = alpha.transpose(0, 2, 1)
        put("x", -inst.R)
        put("y_plus", penalty)
        put("y_minus", penalty)
        put("b", task_values[:, :, None, :] * np.ones((1, 1, W, 1)))
        return c, Sense.MIN

    # Routing: z[s][s'][v][t] costs P[s][s'] - C*_v alpha[s][t][v]
    gain = (inst.vehicle_capacity[None, None, :] * alpha).transpose(0, 2, 1)  # (S, V, T)
    put("z", inst.P[:, :, None, None] - gain[:, None, :, :])
    return c, Sense.MIN


def idle_from_routes(instance: ProblemInstance, z: np.ndarray) -> np.ndarray:
    """sigma[v][s][t] implied by the routes z and the vehicles' start stations."""
    S, V, T = instance.n_stations, instance.n_vehicles, instance.horizon
    sigma = np.zeros((V, S, T))
    z = np.asarray(z, dtype=float)
    for v in range(V):
        here = int(instance.vehicle_start[v])
        for t in range(T):
            outgoing = z[:, :, v, t]
            departs = outgoing[here] > 0.5
            if np.any(np.delete(outgoing, here, axis=0) > 0.5):
                raise ValueError(f"vehicle {v} is routed from a station it is not at in epoch {t}")
            if departs.sum() > 1:
                raise ValueError(f"vehicle {v} has more than one move in epoch {t}")
            if departs.any():
                here = int(np.flatnonzero(departs)[0])
            else:
                sigma[v, here, t] = 1.0
    return sigma


def build_milp(
    instance: ProblemInstance,
    mode: OperatingMode = OperatingMode.JOINT,
    fixed_routes: Optional[np.ndarray] = None,
    objective: Objective | str = Objective.FULL,
    alpha: Optional[np.ndarray] = None,
) -> MilpProblem:
    """Emit the MILP for ``instance`` in the given mode.

    ``fixed_routes`` pins z (and the idle indicators it implies), which
    turns the full problem into the primal-extraction problem.
    """
    layout = VarLayout(instance, OperatingMode(mode), Objective(objective))
    task_values = task_value_tensor(instance)
    rows = _constraint_rows(layout, task_values)
    c, sense = objective_vector(layout, alpha=alpha, task_values=task_values)
    lo, hi = layout.bounds()

    if fixed_routes is not None:
        if "z" not in layout:
            raise ValueError("fixed routes need a formulation with routing variables")
        z = np.round(np.asarray(fixed_routes, dtype=float))
        if z.shape != layout.blocks["z"].shape:
            raise ValueError(f"fixed routes have shape {z.shape}, expected {layout.blocks['z'].shape}")
        sigma = idle_from_routes(instance, z)
        for name, values in (("z", z), ("sigma", sigma)):
            idx = layout.ids(name).ravel()
            lo[idx] = values.ravel()
            hi[idx] = values.ravel()

    return MilpProblem(
        c=c,
        A=rows.matrix(),
        relations=tuple(rows.relations),
        rhs=np.asarray(rows.rhs, dtype=float),
        lo=lo,
        hi=hi,
        integrality=layout.integrality(),
        sense=sense,
        var_names=layout.var_names(),
        row_names=tuple(rows.names),
    )


def with_objective(problem: MilpProblem, layout: VarLayout, alpha: np.ndarray) -> MilpProblem:
    """Same constraints, objective re-priced for new multipliers."""
    c, sense = objective_vector(layout, alpha=alpha)
    return replace(problem, c=c, sense=sense)


def encode(layout: VarLayout, sol: Solution) -> np.ndarray:
    """Solution -> MILP assignment."""
    validate_shapes(layout.instance, sol)
    assignment = np.zeros(layout.n_vars)
    for name, block in layout.blocks.items():
        values = getattr(sol, name)
        if name in ("d_sharp", "d_star"):
            values = values[:, 1:]
        assignment[block.offset:block.offset + block.size] = np.asarray(values, dtype=float).ravel()
    return assignment


def decode(layout: VarLayout, assignment: np.ndarray) -> Solution:
    """MILP assignment of a full formulation -> Solution.

    Blocks the mode leaves out are filled with their forced values: no
    operations, idle vehicles at their start stations, constant loads.
    """
    if layout.objective is not Objective.FULL:
        raise ValueError("only full formulations decode to a Solution")
    inst = layout.instance
    S, V, W, T = inst.n_stations, inst.n_vehicles, inst.n_trailers, inst.horizon
    values = Solution.zeros(S, V, W, T).mutable()
    for name in layout.blocks:
        block_values = layout.extract(assignment, name)
        if name in INTEGER_BLOCKS:
            block_values = np.round(block_values)
        if name in ("d_sharp", "d_star"):
            values[name][:, 1:] = block_values
        else:
            values[name] = block_values

    values["d_sharp"][:, 0] = inst.initial_bikes
    values["d_star"][:, 0] = inst.vehicle_load
    if "d_star" not in layout:
        values["d_star"][:] = inst.vehicle_load[:, None]
    if "sigma" not in layout:
        for v in range(V):
            values["sigma"][v, inst.vehicle_start[v], :] = 1.0
    values["task_values"] = task_value_tensor(inst)
    return Solution(**values)


def variable_count(instance: ProblemInstance, mode: OperatingMode = OperatingMode.JOINT) -> dict[str, int]:
    """Closed-form variable count per block of the full formulation."""
    S, V, W, T = instance.n_stations, instance.n_vehicles, instance.n_trailers, instance.horizon
    counts = {
        "x": S * S * T,
        "y_plus": S * V * T,
        "y_minus": S * V * T,
        "z": S * S * V * T,
        "a_plus": S * W * T,
        "a_minus": S * W * T,
        "b": S * S * W * T,
        "d_sharp": S * T,
        "d_star": V * T,
        "sigma": V * S * T,
    }
    present = block_names(OperatingMode(mode), Objective.FULL)
    return {name: counts[name] for name in present}
