"""Structured error types.

Every error carries a machine-readable ``code``, a human-readable message and
free-form context so the CLI can emit it as JSON.
"""

from typing import Any

from drrpvt.contracts.envelope import Message


class DrrpvtError(Exception):
    """Base class for all DRRPVT errors."""

    code = "drrpvt_error"

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_message(self) -> Message:
        """Convert to an envelope message."""
        return Message(code=self.code, message=self.message, context=self.context)


class InstanceValidationError(DrrpvtError):
    """The problem instance breaks one of its own invariants."""

    code = "invalid_instance"


class DimensionMismatchError(DrrpvtError):
    """A tensor does not have the shape the instance implies."""

    code = "dimension_mismatch"

    def __init__(self, tensor: str, expected: tuple[int, ...], found: tuple[int, ...]):
        super().__init__(
            f"tensor '{tensor}' has shape {found}, expected {expected}",
            tensor=tensor,
            expected=list(expected),
            found=list(found),
        )
        self.tensor = tensor


class InstanceSchemaError(DrrpvtError):
    """The instance file declares a schema version we do not read."""

    code = "schema_mismatch"

    def __init__(self, found: Any, expected: str):
        super().__init__(
            f"instance schema {found!r} does not match expected {expected!r}",
            found=found,
            expected=expected,
        )
        self.found = found
        self.expected = expected


class InstanceFormatError(DrrpvtError):
    """The instance file has unknown or malformed fields."""

    code = "instance_format"


class InstanceParseError(DrrpvtError):
    """The instance file is not valid JSON."""

    code = "parse_error"

    def __init__(self, message: str, byte_offset: int, path: str | None = None):
        super().__init__(message, byte_offset=byte_offset, path=path)
        self.byte_offset = byte_offset


class SchemaError(DrrpvtError):
    """A CSV input lacks a mandatory column."""

    code = "missing_column"

    def __init__(self, column: str, path: str | None = None):
        super().__init__(f"missing mandatory column '{column}'", column=column, path=path)
        self.column = column


class SolverNumericalError(DrrpvtError):
    """The LP engine hit a numerical breakdown."""

    code = "solver_numerical"


class SlaveInfeasibleError(DrrpvtError):
    """A Lagrangian slave problem has no feasible point."""

    code = "slave_infeasible"


class PlanInfeasibleError(DrrpvtError):
    """An epoch plan cannot be executed from the current state."""

    code = "plan_infeasible"

    def __init__(self, violations: list[Any], epoch: int):
        super().__init__(
            f"plan for epoch {epoch} violates {len(violations)} constraint(s)",
            epoch=epoch,
            violations=[
                v.model_dump() if hasattr(v, "model_dump") else str(v) for v in violations
            ],
        )
        self.violations = violations


class ConfigError(DrrpvtError):
    """Inconsistent command-line or file configuration."""

    code = "config_error"


class BudgetExceededError(DrrpvtError):
    """An auction paid out more than its budget."""

    code = "budget_exceeded"


class ConservationError(DrrpvtError):
    """A simulated epoch created or destroyed bikes."""

    code = "conservation_error"

    def __init__(self, epoch: int, before: int, after: int):
        super().__init__(
            f"epoch {epoch}: bike count changed from {before} to {after}", epoch=epoch, before=before, after=after
        )
        self.epoch = epoch
