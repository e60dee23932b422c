"""Constraint checker: reports every violated row of C1-C15 for a Solution."""

from typing import Optional

import numpy as np

from drrpvt.config import settings
from drrpvt.contracts.instance import ProblemInstance
from drrpvt.contracts.solution import ConstraintViolation, Solution
from drrpvt.model.objective import task_value_tensor, transition_fractions, validate_shapes


class _Report:
    def __init__(self, tol: float):
        self.tol = tol
        self.violations: list[ConstraintViolation] = []

    def excess(self, cid: str, amount: np.ndarray, axes: tuple[str, ...], detail: Optional[str] = None) -> None:
        """Record every entry of ``amount`` above the tolerance."""
        amount = np.asarray(amount, dtype=float)
        for idx in np.argwhere(amount > self.tol):
            location = {axis: int(i) for axis, i in zip(axes, idx)}
            self.violations.append(
                ConstraintViolation(
                    constraint_id=cid,
                    location=location,
                    magnitude=float(amount[tuple(idx)]),
                    detail=detail,
                )
            )

    def mismatch(self, cid: str, diff: np.ndarray, axes: tuple[str, ...], detail: Optional[str] = None) -> None:
        self.excess(cid, np.abs(diff), axes, detail)

    def outside(self, cid: str, values: np.ndarray, lo, hi, axes: tuple[str, ...], detail: str) -> None:
        below = np.asarray(lo, dtype=float) - values
        above = values - np.asarray(hi, dtype=float)
        self.excess(cid, np.maximum(below, above), axes, detail)

    def integral(self, cid: str, values: np.ndarray, axes: tuple[str, ...], detail: str) -> None:
        self.excess(cid, np.abs(values - np.round(values)), axes, detail)


def check_solution(instance: ProblemInstance, sol: Solution, tol: Optional[float] = None) -> list[ConstraintViolation]:
    """Every constraint row the solution violates by more than ``tol``.

    Locations use the axes s, s2 (destination), v, w and t. The per-variable
    inventory bounds of C15 on y and a are covered by the station-level C10
    and C11 rows and are not reported twice.
    """
    validate_shapes(instance, sol)
    tol = settings.SOLUTION_TOL if tol is None else tol
    report = _Report(tol)
    inst = instance
    S, V, W, T = inst.n_stations, inst.n_vehicles, inst.n_trailers, inst.horizon
    if S == 0 or T == 0:
        return []

    x, z, b = sol.x, sol.z, sol.b
    y_plus, y_minus = sol.y_plus, sol.y_minus
    a_plus, a_minus = sol.a_plus, sol.a_minus
    d, d_star, sigma = sol.d_sharp, sol.d_star, sol.sigma
    cap = inst.station_capacity
    v_cap = inst.vehicle_capacity
    w_cap = inst.trailer_capacity

    # C1: station inventory balance with one-epoch-lagged arrivals
    report.mismatch("C1", d[:, 0] - inst.initial_bikes, ("s",), "initial inventory")
    arrivals = np.zeros((S, T))
    arrivals[:, 0] = inst.incoming_bikes
    if T > 1:
        arrivals[:, 1:] = x[:, :, :-1].sum(axis=0)
    expected = (
        d[:, :-1]
        + arrivals
        - x.sum(axis=1)
        + (y_minus - y_plus).sum(axis=1)
        + (a_minus - a_plus).sum(axis=1)
    )
    report.mismatch("C1", d[:, 1:] - expected, ("s", "t"))

    # C2: hired flow follows the transition fractions
    frac = transition_fractions(inst.F)
    report.excess("C2", x - d[:, None, :-1] * frac, ("s", "s2", "t"))

    # C3: trailer task values match the instance
    report.mismatch("C3", sol.task_values - task_value_tensor(inst), ("s", "s2", "t"))

    # C4: trailer budget
    spend = np.einsum("ijwt,ijt->t", b, sol.task_values) if W else np.zeros(T)
    if inst.economics.budget_per_epoch:
        report.excess("C4", spend - inst.economics.budget, ("t",), "per-epoch budget")
    else:
        report.excess("C4", np.array([spend.sum() - inst.economics.budget]), (), "horizon budget")

    # C5: vehicle load balance
    report.mismatch("C5", d_star[:, 0] - inst.vehicle_load, ("v",), "initial load")
    load_next = d_star[:, :-1] + (y_plus - y_minus).sum(axis=0)
    report.mismatch("C5", d_star[:, 1:] - load_next, ("v", "t"))

    # C6: vehicle flow conservation (sigma[v][s][t] marks an idle vehicle)
    if V:
        out_flow = z.sum(axis=1).transpose(1, 0, 2) + sigma  # (V, S, T)
        in_flow = np.zeros((V, S, T))
        in_flow[np.arange(V), inst.vehicle_start, 0] = 1.0
        if T > 1:
            in_flow[:, :, 1:] = z[:, :, :, :-1].sum(axis=0).transpose(1, 0, 2) + sigma[:, :, :-1]
        report.mismatch("C6", out_flow - in_flow, ("v", "s", "t"))

        # C7: at most one vehicle enters a station per epoch
        report.excess("C7", z.sum(axis=(0, 2)) - 1.0, ("s", "t"))

        # C8: operations only where the vehicle departs from
        departs = z.sum(axis=1)  # (S, V, T)
        report.excess("C8", y_plus + y_minus - v_cap[None, :, None] * departs, ("s", "v", "t"))

    if W:
        # C9: trailer pickups only at the task origin
        tasks_from = b.sum(axis=1)  # (S, W, T)
        report.excess("C9", a_plus - w_cap[None, :, None] * tasks_from, ("s", "w", "t"))

        # C12: range limit
        too_far = inst.D[:, :, None] > inst.trailer_range[None, None, :]
        report.excess("C12", b * too_far[:, :, :, None], ("s", "s2", "w", "t"), "task beyond trailer range")

        # C13: one task per trailer and epoch
        report.excess("C13", b.sum(axis=(0, 1)) - 1.0, ("w", "t"))

        # C14: dropoffs equal the carried bikes at the task destination
        tasks_to = b.sum(axis=0)  # (S, W, T)
        carried = a_plus.sum(axis=0)  # (W, T)
        report.mismatch("C14", a_minus - tasks_to * carried[None, :, :], ("s", "w", "t"))

    # C10 / C11: station-level pickup and dropoff limits
    pickups = y_plus.sum(axis=1) + a_plus.sum(axis=1)
    dropoffs = y_minus.sum(axis=1) + a_minus.sum(axis=1)
    report.excess("C10", pickups - d[:, :-1], ("s", "t"), "pickups exceed docked bikes")
    report.excess("C11", dropoffs - (cap[:, None] - d[:, :-1]), ("s", "t"), "dropoffs exceed free docks")

    # C15: domains
    report.outside("C15", x, 0.0, inst.F, ("s", "s2", "t"), "x outside [0, F]")
    report.outside("C15", d, 0.0, cap[:, None], ("s", "t"), "station inventory outside [0, C]")
    report.outside("C15", d_star, 0.0, v_cap[:, None], ("v", "t"), "vehicle load outside [0, C*]")
    for name, values, upper, axes in (
        ("y_plus", y_plus, v_cap[None, :, None], ("s", "v", "t")),
        ("y_minus", y_minus, v_cap[None, :, None], ("s", "v", "t")),
        ("a_plus", a_plus, w_cap[None, :, None], ("s", "w", "t")),
        ("a_minus", a_minus, w_cap[None, :, None], ("s", "w", "t")),
    ):
        report.outside("C15", values, 0.0, upper, axes, f"{name} outside its capacity range")
        report.integral("C15", values, axes, f"{name} not integral")
    for name, values, axes in (
        ("z", z, ("s", "s2", "v", "t")),
        ("b", b, ("s", "s2", "w", "t")),
    ):
        report.outside("C15", values, 0.0, 1.0, axes, f"{name} outside [0, 1]")
        report.integral("C15", values, axes, f"{name} not binary")
    report.outside("C15", sigma, 0.0, 1.0, ("v", "s", "t"), "sigma outside [0, 1]")

    return report.violations


def violation_summary(violations: list[ConstraintViolation]) -> dict[str, int]:
    """Violation counts per constraint id."""
    counts: dict[str, int] = {}
    for v in violations:
        counts[v.constraint_id] = counts.get(v.constraint_id, 0) + 1
    return dict(sorted(counts.items(), key=lambda kv: int(kv[0][1:])))
