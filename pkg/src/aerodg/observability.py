"""Structured logging setup."""

import logging
import sys
import time
from contextlib import contextmanager
from typing import Iterator

import structlog

from .exceptions import AeroDGError

logger = structlog.get_logger(__name__)


def configure_logging(level: str = "INFO", fmt: str = "console") -> None:
    """Configure structlog on top of the stdlib logging module."""
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level.upper(), logging.INFO),
        force=True,
    )

    renderer: structlog.types.Processor
    if fmt == "json":
        renderer = structlog.processors.JSONRenderer()
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


@contextmanager
def timed(stage: str, **context: object) -> Iterator[None]:
    """Log the wall time spent in a pipeline stage; failures carry the stage name."""
    start = time.perf_counter()
    logger.debug("Stage started", stage=stage, **context)
    try:
        yield
    except AeroDGError as exc:
        exc.details.setdefault("stage", stage)
        raise
    finally:
        logger.info("Stage finished", stage=stage, seconds=round(time.perf_counter() - start, 3), **context)
