import logging
import sys

import structlog

from mtrd.core.config import settings


def configure_logging(level: str | None = None, fmt: str | None = None) -> None:
    """Configure structlog once per process; events go to stderr."""
    level_name = (level or settings.log).upper()
    numeric = logging.getLevelName(level_name)
    if not isinstance(numeric, int):
        numeric = logging.WARNING

    renderer = (
        structlog.processors.JSONRenderer(sort_keys=True)
        if (fmt or settings.log_format) == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def get_logger(name: str) -> structlog.typing.FilteringBoundLogger:
    return structlog.get_logger(name)
