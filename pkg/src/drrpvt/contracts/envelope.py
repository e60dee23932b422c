"""Command output envelope and message types."""

from typing import Any, Generic, Optional, TypeVar

from pydantic import BaseModel, Field

T = TypeVar("T")


class Message(BaseModel):
    """A message (error, warning or diagnostic) produced by a command."""

    code: str = Field(..., description="Machine-readable error/warning code")
    message: str = Field(..., description="Human-readable message")
    context: dict[str, Any] = Field(
        default_factory=dict,
        description="Additional context for debugging",
    )


class CommandOutput(BaseModel, Generic[T]):
    """Standard output envelope for CLI commands and pipelines.

    Failures are emitted as this envelope in JSON so callers can parse them.
    """

    ok: bool = Field(..., description="Whether the command succeeded")
    data: Optional[T] = Field(default=None, description="The result data (if successful)")
    errors: list[Message] = Field(default_factory=list, description="Errors (if any)")
    warnings: list[Message] = Field(default_factory=list, description="Warnings (if any)")
    trace: dict[str, Any] = Field(
        default_factory=dict,
        description="Trace information (command, arguments, timings, artifact paths)",
    )

    @classmethod
    def success(
        cls,
        data: T,
        warnings: Optional[list[Message]] = None,
        trace: Optional[dict[str, Any]] = None,
    ) -> "CommandOutput[T]":
        """Create a successful output."""
        return cls(ok=True, data=data, warnings=warnings or [], trace=trace or {})

    @classmethod
    def from_exception(cls, command: str, error: Exception) -> "CommandOutput[T]":
        """Failure envelope for an exception raised while running ``command``.

        Errors outside the DRRPVT hierarchy get the ``unexpected_error`` code.
        """
        to_message = getattr(error, "to_message", None)
        message = to_message() if callable(to_message) else err("unexpected_error", f"{type(error).__name__}: {error}")
        return cls.failure([message], trace={"command": command})

    @classmethod
    def failure(
        cls,
        errors: list[Message],
        warnings: Optional[list[Message]] = None,
        trace: Optional[dict[str, Any]] = None,
    ) -> "CommandOutput[T]":
        """Create a failed output."""
        return cls(ok=False, data=None, errors=errors, warnings=warnings or [], trace=trace or {})


def err(code: str, message: str, **context: Any) -> Message:
    """Helper to create an error message."""
    return Message(code=code, message=message, context=context)


def warn(code: str, message: str, **context: Any) -> Message:
    """Helper to create a warning message."""
    return Message(code=code, message=message, context=context)
