"""Structured logging setup for nanores."""

import logging
import sys

import structlog

from .settings import LoggingSettings


def configure_logging(settings: LoggingSettings) -> None:
    """Configure structlog once per process; logs go to stderr or ``file_path``."""
    level = getattr(logging, settings.level.upper(), logging.INFO)
    stream = open(settings.file_path, "a") if settings.file_path else sys.stderr

    renderer = (
        structlog.processors.JSONRenderer()
        if settings.format == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.PrintLoggerFactory(file=stream),
        cache_logger_on_first_use=False,
    )
