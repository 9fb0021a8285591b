"""Structured logging infrastructure for cameron-liebler.

This module provides:
- JSON log format for production and CI runs
- Text format with colors for interactive use
- A run id attached to every record of one CLI invocation
- Summarisation of bulky payloads (line-id sets, arrays) so reports stay readable
- Configurable log levels per environment

Logs go to stderr; stdout is reserved for command output (documents, reports).

Usage:
    from cameron_liebler.core.logging import setup_logging, get_logger, run_context

    setup_logging()
    logger = get_logger(__name__)

    with run_context():
        logger.info("Decomposition complete", extra={"q": 7, "L0": 100})
"""

import json
import logging
import sys
import uuid
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from datetime import datetime, timezone
from typing import Any

import numpy as np

from cameron_liebler.config import get_settings

run_id_ctx: ContextVar[str | None] = ContextVar("run_id", default=None)

# Containers longer than this are replaced by a size summary
DEFAULT_MAX_ITEMS = 20

# Maximum length for truncated strings in logs
DEFAULT_TRUNCATE_LENGTH = 200

_STANDARD_FIELDS = frozenset(
    {
        "name",
        "msg",
        "args",
        "created",
        "filename",
        "funcName",
        "levelname",
        "levelno",
        "lineno",
        "module",
        "msecs",
        "pathname",
        "process",
        "processName",
        "relativeCreated",
        "stack_info",
        "exc_info",
        "exc_text",
        "thread",
        "threadName",
        "taskName",
        "message",
        "run_id",
    }
)


def get_run_id() -> str | None:
    """Return the run id of the current context, if any."""
    return run_id_ctx.get()


@contextmanager
def run_context(run_id: str | None = None) -> Iterator[str]:
    """Bind a run id to every log record emitted inside the block.

    Args:
        run_id: Explicit id. A short random id is generated when omitted.

    Yields:
        The active run id.
    """
    value = run_id or uuid.uuid4().hex[:12]
    token = run_id_ctx.set(value)
    try:
        yield value
    finally:
        run_id_ctx.reset(token)


def truncate_string(value: str, max_length: int = DEFAULT_TRUNCATE_LENGTH) -> str:
    """Truncate a string for logging, preserving useful context.

    Example:
        >>> truncate_string("Hello World", max_length=8)
        'Hello...'
    """
    if len(value) <= max_length:
        return value
    return value[: max_length - 3] + "..."


def summarize_value(value: Any, max_items: int = DEFAULT_MAX_ITEMS) -> Any:
    """Make a single value safe to log.

    Large collections are replaced by a short summary, numpy scalars become plain
    numbers and long strings are truncated.

    Args:
        value: The value to summarise.
        max_items: Collections longer than this are summarised.

    Returns:
        A JSON-friendly, bounded-size representation.
    """
    if isinstance(value, np.ndarray):
        if value.size > max_items:
            return f"[array {tuple(value.shape)} {value.dtype}]"
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (set, frozenset, list, tuple)):
        if len(value) > max_items:
            return f"[{len(value)} items]"
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [summarize_value(item, max_items) for item in items]
    if isinstance(value, dict):
        return summarize_for_logging(value, max_items)
    if isinstance(value, str):
        return truncate_string(value)
    return value


def summarize_for_logging(
    data: dict[str, Any],
    max_items: int = DEFAULT_MAX_ITEMS,
) -> dict[str, Any]:
    """Summarise every value of a dictionary for logging.

    Example:
        >>> summarize_for_logging({"q": 7, "lines": set(range(1425))})
        {'q': 7, 'lines': '[1425 items]'}
    """
    if not isinstance(data, dict):
        return data
    return {key: summarize_value(value, max_items) for key, value in data.items()}


class JSONFormatter(logging.Formatter):
    """JSON formatter for structured logging.

    Outputs logs as single-line JSON objects with consistent field ordering.
    Includes run id, timestamp, and any extra fields passed to the logger.
    """

    def __init__(self, include_extra: bool = True):
        super().__init__()
        self.include_extra = include_extra

    def format(self, record: logging.LogRecord) -> str:
        """Format the log record as JSON."""
        log_entry: dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "run_id": getattr(record, "run_id", None),
        }

        log_entry["location"] = {
            "file": record.filename,
            "line": record.lineno,
            "function": record.funcName,
        }

        if record.exc_info:
            log_entry["exception"] = self.formatException(record.exc_info)

        if self.include_extra:
            extra = {
                key: value
                for key, value in record.__dict__.items()
                if key not in _STANDARD_FIELDS and not key.startswith("_")
            }
            if extra:
                log_entry["extra"] = summarize_for_logging(extra)

        return json.dumps(log_entry, default=str, ensure_ascii=False)


class DevelopmentFormatter(logging.Formatter):
    """Colored text formatter for interactive runs."""

    COLORS = {
        "DEBUG": "\033[36m",  # Cyan
        "INFO": "\033[32m",  # Green
        "WARNING": "\033[33m",  # Yellow
        "ERROR": "\033[31m",  # Red
        "CRITICAL": "\033[35m",  # Magenta
    }
    RESET = "\033[0m"

    def __init__(self, include_run_id: bool = True, include_extra: bool = True):
        super().__init__()
        self.include_run_id = include_run_id
        self.include_extra = include_extra

    def format(self, record: logging.LogRecord) -> str:
        """Format the log record with colors."""
        color = self.COLORS.get(record.levelname, "")
        run_id = getattr(record, "run_id", "-")
        timestamp = datetime.fromtimestamp(record.created).strftime("%H:%M:%S.%f")[:-3]

        parts = [timestamp, f"{color}{record.levelname:8}{self.RESET}"]
        if self.include_run_id and run_id and run_id != "-":
            parts.append(f"[{run_id[:8]}]")
        parts.extend([f"{record.name}:{record.lineno}", "-", record.getMessage()])

        if self.include_extra:
            extra = {
                key: value
                for key, value in record.__dict__.items()
                if key not in _STANDARD_FIELDS and not key.startswith("_")
            }
            if extra:
                parts.append(
                    " ".join(f"{k}={v}" for k, v in summarize_for_logging(extra).items())
                )

        output = " ".join(parts)
        if record.exc_info:
            output += "\n" + self.formatException(record.exc_info)
        return output


class RunIdFilter(logging.Filter):
    """Logging filter that adds the current run id to log records."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.run_id = get_run_id() or "-"
        return True


class BulkyDataFilter(logging.Filter):
    """Logging filter that summarises bulky extra fields in place.

    A line class has thousands of ids; logging it verbatim would drown the output.
    """

    def __init__(self, max_items: int = DEFAULT_MAX_ITEMS):
        super().__init__()
        self.max_items = max_items

    def filter(self, record: logging.LogRecord) -> bool:
        for key in list(record.__dict__.keys()):
            if key.startswith("_") or key in _STANDARD_FIELDS:
                continue
            setattr(record, key, summarize_value(getattr(record, key), self.max_items))
        return True


def get_log_level(environment: str, debug: bool) -> int:
    """Determine the appropriate log level for the environment.

    Args:
        environment: The environment name (development, ci, production).
        debug: Whether debug mode is enabled.

    Returns:
        The logging level to use.
    """
    if debug:
        return logging.DEBUG

    levels = {
        "development": logging.INFO,
        "ci": logging.INFO,
        "production": logging.WARNING,
    }

    return levels.get(environment, logging.INFO)


def setup_logging(
    level: int | None = None,
    json_format: bool | None = None,
) -> None:
    """Configure structured logging for the application.

    Args:
        level: Override the log level. If None, taken from settings or environment.
        json_format: Force JSON format. If None, taken from settings or environment.

    Example:
        # Auto-configure based on environment
        setup_logging()

        # Force JSON format with DEBUG level
        setup_logging(level=logging.DEBUG, json_format=True)
    """
    settings = get_settings()

    if level is None:
        if settings.log_level:
            level = logging.getLevelName(settings.log_level.upper())
            if not isinstance(level, int):
                level = logging.INFO
        else:
            level = get_log_level(settings.environment, settings.debug)

    if json_format is None:
        if settings.log_format == "auto":
            json_format = settings.is_production
        else:
            json_format = settings.log_format == "json"

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)
    handler.addFilter(RunIdFilter())
    handler.addFilter(BulkyDataFilter())

    if json_format:
        handler.setFormatter(JSONFormatter())
    else:
        handler.setFormatter(DevelopmentFormatter())

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()
    root_logger.addHandler(handler)


def get_logger(name: str) -> logging.Logger:
    """Get a logger with the given name.

    Example:
        logger = get_logger(__name__)
        logger.info("Verified class", extra={"q": 7, "passed": True})
    """
    return logging.getLogger(name)
