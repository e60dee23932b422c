"""Pydantic contracts shared across modules."""

from drrpvt.contracts.auction import Allocation, Award, Bid, TrailerTask
from drrpvt.contracts.envelope import CommandOutput, Message, err, warn
from drrpvt.contracts.instance import (
    DemandTensor,
    DistanceMatrix,
    EconomicModel,
    OperatingMode,
    ProblemInstance,
    Station,
    Trailer,
    Vehicle,
)
from drrpvt.contracts.plan import EpochPlan, TrailerAction, VehicleAction
from drrpvt.contracts.records import StationRecord, TripRecord
from drrpvt.contracts.solution import ConstraintViolation, Solution, tensor_shapes

__all__ = [
    "Allocation",
    "Award",
    "Bid",
    "CommandOutput",
    "ConstraintViolation",
    "DemandTensor",
    "DistanceMatrix",
    "EconomicModel",
    "EpochPlan",
    "Message",
    "OperatingMode",
    "ProblemInstance",
    "Solution",
    "Station",
    "StationRecord",
    "Trailer",
    "TrailerAction",
    "TrailerTask",
    "TripRecord",
    "Vehicle",
    "VehicleAction",
    "err",
    "tensor_shapes",
    "warn",
]
