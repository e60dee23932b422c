"""Dual state, parameters and results of the decomposition loop."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from drrpvt.config import settings
from drrpvt.contracts.solution import Solution


class LddParams(BaseModel):
    """Step-size schedule and termination settings."""

    gamma0: float = Field(default_factory=lambda: settings.LDD_GAMMA0, gt=0.0)
    gamma_decay: float = Field(default_factory=lambda: settings.LDD_GAMMA_DECAY, gt=0.0)
    max_iterations: int = Field(default_factory=lambda: settings.LDD_MAX_ITERATIONS, ge=1)
    relative_delta: float = Field(default_factory=lambda: settings.LDD_RELATIVE_DELTA, ge=0.0)
    absolute_delta: float = Field(default_factory=lambda: settings.LDD_ABSOLUTE_DELTA, gt=0.0)
    parallel_slaves: bool = Field(default_factory=lambda: settings.LDD_PARALLEL_SLAVES)
    routing_method: str = Field(default="auto", pattern="^(auto|graph|milp)$")
    backend: Optional[str] = Field(default=None, description="MILP backend override")
    time_limit_s: float = Field(default_factory=lambda: settings.MILP_TIME_LIMIT_S, gt=0.0)

    def step_size(self, iteration: int) -> float:
        """gamma_k = gamma0 / (1 + k / decay)."""
        return self.gamma0 / (1.0 + iteration / self.gamma_decay)

    def threshold(self, best_primal: float) -> float:
        return max(self.absolute_delta, self.relative_delta * abs(best_primal))


@dataclass
class DualState:
    """Multipliers and bounds after an iteration.

    ``alpha`` is indexed [s][t][v]. ``rho1``, ``rho2`` and ``best_dual`` live
    in the minimization frame (negated profit); ``primal_value`` and
    ``best_primal`` are profits.
    """

    alpha: np.ndarray
    gamma: float = 0.0
    delta: float = 0.0
    iteration: int = 0
    rho1: float = 0.0
    rho2: float = 0.0
    primal_value: float = float("-inf")
    best_primal: float = float("-inf")
    best_dual: float = float("-inf")

    @classmethod
    def initial(cls, n_stations: int, horizon: int, n_vehicles: int) -> "DualState":
        return cls(alpha=np.zeros((n_stations, horizon, n_vehicles)))

    @property
    def dual_value(self) -> float:
        """L(alpha) = rho1 + rho2."""
        return self.rho1 + self.rho2

    @property
    def gap(self) -> float:
        """best primal minus best dual, both as minimization values."""
        return -self.best_primal - self.best_dual


@dataclass(frozen=True)
class TraceRow:
    """One iteration, every value in the minimization frame."""

    iteration: int
    dual: float
    primal: float
    best_dual: float
    best_primal: float
    gap: float
    gamma: float


@dataclass(frozen=True, eq=False)
class LddResult:
    """Best primal plan found by the decomposition and its certificate."""

    solution: Solution
    primal_value: float
    dual_bound: float
    iterations_used: int
    converged: bool
    wall_time: float
    gap_trace: list[TraceRow] = field(default_factory=list)

    @property
    def gap(self) -> float:
        return -self.primal_value - self.dual_bound

    def trace_frame(self) -> pd.DataFrame:
        """Gap trace as a DataFrame: iteration, dual, primal, gap and the best-so-far envelopes."""
        columns = ["iteration", "dual", "primal", "best_dual", "best_primal", "gap", "gamma"]
        return pd.DataFrame([row.__dict__ for row in self.gap_trace], columns=columns)

    def summary(self) -> dict:
        return {
            "primal_value": self.primal_value,
            "dual_bound": self.dual_bound,
            "gap": self.gap,
            "iterations_used": self.iterations_used,
            "converged": self.converged,
            "wall_time": self.wall_time,
        }
