"""
Logging for experiment runs.

Harness events carry their (dataset, seed, learner, operation) context and are
rendered as `message | key=value ...`; `setup_logging` configures the root
logger for the CLI.
"""
import json
import logging
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler
from typing import Any, Dict, Optional

import numpy as np

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
MAX_LOG_BYTES = 5 * 1024 * 1024
LOG_BACKUPS = 5
# HTTP client loggers are chatty at INFO during dataset downloads
QUIET_LOGGERS = ("urllib3",)


@dataclass
class LogContext:
    """Where a message comes from; unset fields are omitted from the output."""
    dataset: Optional[str] = None
    seed: Optional[int] = None
    learner: Optional[str] = None
    operation: Optional[str] = None
    extra_data: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.extra_data is None:
            self.extra_data = {}

    def to_dict(self) -> Dict[str, Any]:
        result = {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if f.name != "extra_data" and getattr(self, f.name) is not None
        }
        result.update(self.extra_data)
        return result


def _render_value(value: Any) -> str:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, (dict, list, tuple)):
        try:
            return json.dumps(value, separators=(",", ":"), default=str)
        except (TypeError, ValueError):
            return str(value)
    return str(value)


def format_structured_message(message: str, context: Dict[str, Any]) -> str:
    """`message | k1=v1 k2=v2`, or the bare message for an empty context."""
    if not context:
        return message
    pairs = " ".join(f"{key}={_render_value(value)}" for key, value in context.items())
    return f"{message} | {pairs}"


class StructuredLogger:
    """Wraps a stdlib logger and appends LogContext to every message."""

    def __init__(self, name: str, default_context: Optional[Dict[str, Any]] = None):
        self.logger = logging.getLogger(name)
        self.default_context = dict(default_context or {})

    def log(self, level: int, message: str, context: Optional[LogContext] = None, **kwargs) -> None:
        merged = dict(self.default_context)
        if context is not None:
            merged.update(context.to_dict())
        self.logger.log(level, format_structured_message(message, merged), **kwargs)

    def debug(self, message: str, context: Optional[LogContext] = None, **kwargs) -> None:
        self.log(logging.DEBUG, message, context, **kwargs)

    def info(self, message: str, context: Optional[LogContext] = None, **kwargs) -> None:
        self.log(logging.INFO, message, context, **kwargs)

    def warning(self, message: str, context: Optional[LogContext] = None, **kwargs) -> None:
        self.log(logging.WARNING, message, context, **kwargs)

    def error(self, message: str, context: Optional[LogContext] = None, **kwargs) -> None:
        self.log(logging.ERROR, message, context, **kwargs)


def get_structured_logger(name: str, default_context: Optional[Dict[str, Any]] = None) -> StructuredLogger:
    return StructuredLogger(name, default_context)


class UTCFormatter(logging.Formatter):
    """ISO-8601 UTC timestamps with millisecond precision."""

    def formatTime(self, record: logging.LogRecord, datefmt: Optional[str] = None) -> str:
        dt = datetime.fromtimestamp(record.created, timezone.utc)
        return dt.strftime(datefmt) if datefmt else dt.isoformat(timespec="milliseconds")


def setup_logging(log_config: Dict[str, Any]) -> None:
    """
    Attach a rotating file handler (when `path` is set) and a console handler
    to the root logger.

    Args:
        log_config: The `logging` config section (path, level)
    """
    log_path = log_config.get("path", "gdm_ensemble.log")
    level = getattr(logging, str(log_config.get("level", "INFO")).upper(), logging.INFO)
    formatter = UTCFormatter(LOG_FORMAT)

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    handlers = [logging.StreamHandler()]
    if log_path:
        handlers.insert(0, RotatingFileHandler(log_path, maxBytes=MAX_LOG_BYTES, backupCount=LOG_BACKUPS))
    for handler in handlers:
        handler.setFormatter(formatter)
        root_logger.addHandler(handler)
    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(max(level, logging.WARNING))

    logging.info(f"Logging configured: level={logging.getLevelName(level)} file={log_path or 'none'}")
