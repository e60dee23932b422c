"""Master loop of the Lagrangian dual decomposition."""

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from drrpvt.contracts.instance import OperatingMode, ProblemInstance
from drrpvt.errors import ConfigError
from drrpvt.ldd.slaves import (
    PrimalResult,
    RepositionResult,
    RepositionSlave,
    RoutingResult,
    RoutingSlave,
    extract_primal,
    update_duals,
)
from drrpvt.ldd.state import DualState, LddParams, LddResult, TraceRow
from drrpvt.milp import SolveLimits
from drrpvt.util.logging import get_logger

logger = get_logger("ldd")


def run_ldd(
    instance: ProblemInstance,
    params: Optional[LddParams] = None,
    mode: OperatingMode = OperatingMode.JOINT,
) -> LddResult:
    """Dualize C8 and iterate slaves, multiplier updates and primal extraction.

    Stops once best_primal - best_dual (minimization frame) drops to
    ``max(absolute_delta, relative_delta * |best_primal|)`` or after
    ``max_iterations``. The best extracted plan is returned; the first one
    found wins ties.
    """
    params = params or LddParams()
    mode = OperatingMode(mode)
    if mode is OperatingMode.TRAILERS_ONLY:
        raise ConfigError("trailer-only planning has no coupling constraint; solve it directly", mode=mode.value)

    start = time.perf_counter()
    limits = SolveLimits(time_limit_s=params.time_limit_s)
    S, V, T = instance.n_stations, instance.n_vehicles, instance.horizon

    reposition = RepositionSlave(instance, mode, limits, params.backend)
    routing = RoutingSlave(instance, params.routing_method, limits, params.backend)
    state = DualState.initial(S, T, V)
    trace: list[TraceRow] = []
    best: Optional[PrimalResult] = None
    extracted: dict[bytes, PrimalResult] = {}
    converged = False

    executor = ThreadPoolExecutor(max_workers=2) if params.parallel_slaves else None
    try:
        for k in range(params.max_iterations):
            state.iteration = k + 1
            state.gamma = params.step_size(k)
            rep, rout = _solve_slaves(reposition, routing, state.alpha, executor)
            state.rho1, state.rho2 = rep.value, rout.value
            state.best_dual = max(state.best_dual, state.dual_value)

            key = rout.z.astype(np.int8).tobytes()
            primal = extracted.get(key)
            if primal is None:
                primal = extract_primal(instance, rout.z, mode, limits, params.backend)
                extracted[key] = primal
            state.primal_value = primal.value
            if best is None or primal.value > state.best_primal + 1e-12:
                best = primal
                state.best_primal = primal.value

            state.delta = params.threshold(state.best_primal)
            trace.append(
                TraceRow(
                    iteration=state.iteration,
                    dual=state.dual_value,
                    primal=-primal.value,
                    best_dual=state.best_dual,
                    best_primal=-state.best_primal,
                    gap=state.gap,
                    gamma=state.gamma,
                )
            )
            logger.info(
                f"LDD {state.iteration}: dual={state.dual_value:.6g} primal={-primal.value:.6g} "
                f"gap={state.gap:.3g} (delta {state.delta:.3g})"
            )
            if state.gap <= state.delta:
                converged = True
                break
            state.alpha = update_duals(
                state.alpha, state.gamma, rep.y_plus, rep.y_minus, rout.z, instance.vehicle_capacity
            )
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    wall = time.perf_counter() - start
    if not converged:
        logger.warning(
            f"LDD stopped after {state.iteration} iterations with gap {state.gap:.4g} above {state.delta:.4g}"
        )
    return LddResult(
        solution=best.solution,
        primal_value=state.best_primal,
        dual_bound=state.best_dual,
        iterations_used=state.iteration,
        converged=converged,
        wall_time=wall,
        gap_trace=trace,
    )


def _solve_slaves(
    reposition: RepositionSlave,
    routing: RoutingSlave,
    alpha: np.ndarray,
    executor: Optional[ThreadPoolExecutor],
) -> tuple[RepositionResult, RoutingResult]:
    if executor is None:
        return reposition.solve(alpha), routing.solve(alpha)
    rep_future = executor.submit(reposition.solve, alpha)
    rout_future = executor.submit(routing.solve, alpha)
    return rep_future.result(), rout_future.result()
