from __future__ import annotations

import logging
import sys
import time
from contextlib import contextmanager
from typing import Any, Iterator

from pythonjsonlogger.json import JsonFormatter


def configure_logging(level: str | int = "INFO") -> None:
    root = logging.getLogger()
    root.setLevel(level)

    handler = logging.StreamHandler(sys.stderr)
    formatter = JsonFormatter(
        "%(asctime)s %(levelname)s %(name)s %(message)s",
        rename_fields={"levelname": "level", "name": "logger"},
    )
    handler.setFormatter(formatter)

    # Replace existing handlers so repeated CLI invocations in one process do not duplicate lines.
    root.handlers = [handler]


def get_logger(module: str) -> logging.Logger:
    return logging.getLogger(f"hsp.{module}")


def log_event(logger: logging.Logger, event: str, **fields: Any) -> None:
    logger.info(event, extra=fields)


@contextmanager
def timed(logger: logging.Logger, event: str, **fields: Any) -> Iterator[dict[str, Any]]:
    """
    Log `event` with its wall time once the block finishes.

    The yielded dict can be filled with result fields inside the block.
    """
    extra: dict[str, Any] = dict(fields)
    t0 = time.perf_counter()
    try:
        yield extra
    finally:
        extra["wall_time_s"] = round(time.perf_counter() - t0, 6)
        log_event(logger, event, **extra)
