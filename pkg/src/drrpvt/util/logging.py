"""Logging configuration for DRRPVT."""

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, Optional

from rich.console import Console
from rich.logging import RichHandler

# Global console instance for rich output (stderr keeps stdout for JSON)
console = Console(stderr=True)


def setup_logging(
    level: int | str = logging.INFO,
    log_file: Optional[str] = None,
) -> logging.Logger:
    """Set up logging with Rich handler for console output.

    Args:
        level: Logging level, as a number or a name such as "DEBUG"
        log_file: Optional file that also receives every record, with timestamps

    Returns:
        The ``drrpvt`` logger
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO

    logger = logging.getLogger("drrpvt")
    logger.setLevel(level)
    logger.handlers.clear()

    rich_handler = RichHandler(
        console=console,
        show_time=True,
        show_path=False,
        rich_tracebacks=True,
    )
    rich_handler.setLevel(level)
    rich_handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(rich_handler)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(level)
        file_handler.setFormatter(
            logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
        )
        logger.addHandler(file_handler)

    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """``drrpvt.<name>``, or the package logger itself."""
    if name:
        return logging.getLogger(f"drrpvt.{name}")
    return logging.getLogger("drrpvt")


@dataclass
class Timing:
    label: str
    seconds: float = 0.0


@contextmanager
def timed(label: str, logger: Optional[logging.Logger] = None, level: int = logging.INFO) -> Iterator[Timing]:
    """Measure a block's wall time; logs ``<label> took <s>s`` on exit when given a logger.

    The elapsed time is also set when the block raises.
    """
    timing = Timing(label)
    start = time.perf_counter()
    try:
        yield timing
    finally:
        timing.seconds = time.perf_counter() - start
        if logger is not None:
            logger.log(level, f"{label} took {timing.seconds:.3f}s")


def init_default_logging() -> None:
    """Initialize logging at the configured level and file."""
    from drrpvt.config import settings

    setup_logging(level=settings.LOG_LEVEL, log_file=settings.LOG_FILE)
