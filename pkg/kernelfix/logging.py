"""Centralized logging configuration for kernelfix."""

import logging
import os
import sys

import structlog


def configure_logging(level: str | None = None) -> None:
    """Configure structured JSON logging on stderr.

    The level comes from ``level`` or the ``LOG_LEVEL`` environment variable
    and defaults to WARNING, so command output on stdout stays parseable.
    """
    level_name = (level or os.getenv("LOG_LEVEL", "WARNING")).upper()
    log_level = getattr(logging, level_name, logging.WARNING)

    json_formatter = structlog.stdlib.ProcessorFormatter(
        processor=structlog.processors.JSONRenderer(),
    )

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(json_formatter)

    root_logger = logging.getLogger()
    root_logger.handlers.clear()
    root_logger.addHandler(handler)
    root_logger.setLevel(log_level)

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            # rendering happens in the stdlib formatter
            structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )

    # Worker processes inherit the handler; keep multiprocessing chatter down
    logging.getLogger("multiprocessing").setLevel(logging.WARNING)
