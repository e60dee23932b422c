"""Scenario sampling from a fitted demand model."""

from enum import Enum

import numpy as np

from drrpvt.contracts.instance import DemandTensor
from drrpvt.demand.empirical import DemandModel


class SamplingMode(str, Enum):
    POISSON = "poisson"
    BOOTSTRAP = "bootstrap"


def sample_scenario(model: DemandModel, seed: int, mode: SamplingMode | str = SamplingMode.POISSON) -> DemandTensor:
    """Integer demand realization for the whole horizon.

    Poisson mode draws every cell independently around its mean; bootstrap
    mode replays one observed day (falling back to Poisson when the model
    has no daily counts).
    """
    rng = np.random.default_rng(seed)
    mode = SamplingMode(mode)
    if mode is SamplingMode.BOOTSTRAP and model.n_days:
        day = int(rng.integers(model.n_days))
        return DemandTensor.from_array(np.asarray(model.daily[day], dtype=float))
    return DemandTensor.from_array(rng.poisson(model.F.array).astype(float))


def sample_scenarios(
    model: DemandModel,
    seed: int,
    count: int = 1,
    mode: SamplingMode | str = SamplingMode.POISSON,
) -> list[DemandTensor]:
    """``count`` independent scenarios with seeds derived from ``seed``."""
    seeds = np.random.SeedSequence(seed).spawn(count)
    return [sample_scenario(model, int(s.generate_state(1)[0]), mode) for s in seeds]
