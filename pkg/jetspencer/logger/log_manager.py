"""Logging setup for the jetspencer command line.

Two handlers are installed behind a queue so that long rank computations never
wait on terminal or disk I/O:

1.  A `RichHandler` printing the markup-decorated alerts of `jetspencer.cli.alerts`.
2.  A `RotatingFileHandler` writing one JSON object per record, including the
    structured context passed through ``extra={"extra_data": {...}}``.
"""

import atexit
import copy
import json
import logging
import logging.config
from logging.handlers import QueueHandler, QueueListener
from pathlib import Path
from queue import Queue
from typing import Any, Final

from rich.text import Text

__all__ = [
    "DEFAULT_LOGGING_CONFIG",
    "ConsoleOnlyFilter",
    "JSONFormatter",
    "RichConsoleFormatter",
    "console_level",
    "setup_logging",
]

_logger = logging.getLogger(__name__)

LogConfig = dict[str, Any]

_VERBOSITY_LEVELS: Final[tuple[str, ...]] = ("WARNING", "INFO", "DEBUG")


class RichConsoleFormatter(logging.Formatter):
    """Pass the message through untouched; it already carries Rich markup."""

    def format(self, record: logging.LogRecord) -> str:
        """Return the interpolated message."""
        return record.getMessage()


class JSONFormatter(logging.Formatter):
    """One JSON object per record, markup stripped, structured context merged in."""

    def format(self, record: logging.LogRecord) -> str:
        """Serialize a record.

        Values that JSON cannot encode natively (polynomials, rationals) are
        written through `str`.

        Args:
            record: The record to serialize.

        Returns:
            A single-line JSON document.

        Examples:
            >>> record = logging.LogRecord(
            ...     "x", logging.INFO, "f.py", 1, "[b]rank[/b] %d", (3,), None
            ... )
            >>> record.extra_data = {"excluded_locus": ["x1"]}
            >>> payload = json.loads(JSONFormatter().format(record))
            >>> payload["message"], payload["excluded_locus"]
            ('rank 3', ['x1'])
        """
        payload: LogConfig = {
            "timestamp": self.formatTime(record, self.datefmt),
            "level": record.levelname,
            "logger": record.name,
            "message": Text.from_markup(record.getMessage()).plain,
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }
        for name in ("process", "thread", "threadName", "taskName"):
            value = getattr(record, name, None)
            if value is not None:
                payload[name] = value
        extra_data = getattr(record, "extra_data", None)
        if extra_data:
            payload.update(extra_data)
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, default=str)


class ConsoleOnlyFilter(logging.Filter):
    """Keep records flagged ``console_only`` (headers, spacing) out of the log file."""

    def filter(self, record: logging.LogRecord) -> bool:
        """Reject console-only records."""
        return not getattr(record, "console_only", False)


DEFAULT_LOGGING_CONFIG: Final[LogConfig] = {
    "version": 1,
    "disable_existing_loggers": False,
    "filters": {"exclude_console_only": {"()": ConsoleOnlyFilter}},
    "formatters": {
        "rich_console": {"()": RichConsoleFormatter},
        "json_file": {"()": JSONFormatter, "datefmt": "%Y-%m-%dT%H:%M:%S%z"},
    },
    "handlers": {
        "console": {
            "class": "rich.logging.RichHandler",
            "level": "WARNING",
            "formatter": "rich_console",
            "rich_tracebacks": True,
            "show_path": False,
            "show_time": False,
            "show_level": False,
            "markup": True,
        },
        "file": {
            "class": "logging.handlers.RotatingFileHandler",
            "level": "DEBUG",
            "formatter": "json_file",
            "filename": "logs/jetspencer.log.jsonl",
            "maxBytes": 10 * 1024 * 1024,
            "backupCount": 5,
            "encoding": "utf-8",
            "filters": ["exclude_console_only"],
        },
    },
    "root": {"level": "DEBUG", "handlers": ["console", "file"]},
}


def console_level(verbosity: int) -> str:
    """Console level for a ``-v`` count: WARNING, INFO, then DEBUG.

    Examples:
        >>> console_level(0), console_level(1), console_level(5)
        ('WARNING', 'INFO', 'DEBUG')
    """
    return _VERBOSITY_LEVELS[min(max(verbosity, 0), len(_VERBOSITY_LEVELS) - 1)]


def _load_config(config_path: str | Path | None) -> LogConfig:
    """Read a JSON dictConfig, falling back to the default on any problem."""
    if not config_path:
        return copy.deepcopy(DEFAULT_LOGGING_CONFIG)
    path = Path(config_path)
    try:
        with path.open(encoding="utf-8") as handle:
            config: LogConfig = json.load(handle)
    except FileNotFoundError:
        _logger.warning("Logging config '%s' not found; using defaults.", path)
    except (json.JSONDecodeError, TypeError):
        _logger.exception("Logging config '%s' is not valid JSON; using defaults.", path)
    else:
        return config
    return copy.deepcopy(DEFAULT_LOGGING_CONFIG)


def setup_logging(
    config_path: str | Path | None = None,
    default_level: str = "WARNING",
    log_file: str | Path | None = None,
) -> QueueListener:
    """Configure logging and move the handlers behind a queue listener.

    Args:
        config_path: Optional JSON dictConfig; the built-in default otherwise.
        default_level: Level of the console handler.
        log_file: Overrides the file handler's target.

    Returns:
        The started listener; it is also stopped at interpreter exit.
    """
    config = _load_config(config_path)
    handlers = config.get("handlers", {})
    if "console" in handlers:
        handlers["console"]["level"] = default_level.upper()
    if "file" in handlers:
        if log_file is not None:
            handlers["file"]["filename"] = str(log_file)
        Path(handlers["file"]["filename"]).parent.mkdir(parents=True, exist_ok=True)

    logging.config.dictConfig(config)

    root = logging.getLogger()
    targets = list(root.handlers)
    for handler in targets:
        root.removeHandler(handler)
    queue: Queue[logging.LogRecord] = Queue(-1)
    root.addHandler(QueueHandler(queue))
    listener = QueueListener(queue, *targets, respect_handler_level=True)
    listener.start()
    atexit.register(listener.stop)
    _logger.debug("Logging configured.", extra={"extra_data": {"console_level": default_level}})
    return listener
