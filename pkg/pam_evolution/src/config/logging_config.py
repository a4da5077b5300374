"""
Logging configuration for pam-evolution.
"""
import atexit
import logging
import sys
from typing import Optional, TextIO

import structlog
from structlog.typing import FilteringBoundLogger

from ..exceptions import ConfigurationError

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class _TeeWriter:
    """Write log lines to stderr and, optionally, append them to a file."""

    def __init__(self, log_file: Optional[str] = None):
        self._file: Optional[TextIO] = open(log_file, "a", encoding="utf-8") if log_file else None

    def write(self, message: str) -> None:
        sys.stderr.write(message)
        if self._file is not None:
            self._file.write(message)

    def flush(self) -> None:
        sys.stderr.flush()
        if self._file is not None:
            self._file.flush()

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None


_active_writer: Optional[_TeeWriter] = None


@atexit.register
def _close_log_file() -> None:
    if _active_writer is not None:
        _active_writer.close()


def setup_logging(
    log_level: str = "INFO",
    log_file: Optional[str] = None,
    debug_mode: bool = False,
    json_logs: bool = False,
) -> FilteringBoundLogger:
    """
    Setup structured logging for the application.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        log_file: Optional log file path, appended to in addition to stderr
        debug_mode: Add call-site information to every event
        json_logs: Render events as JSON lines instead of console output

    Returns:
        Configured application logger

    Raises:
        ConfigurationError: If ``log_level`` is not a known level name
    """
    global _active_writer
    if log_level.upper() not in LOG_LEVELS:
        raise ConfigurationError(f"unknown log level {log_level!r}", {"allowed": list(LOG_LEVELS)})
    level = getattr(logging, log_level.upper())

    processors = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
    ]

    if debug_mode:
        processors.append(
            structlog.processors.CallsiteParameterAdder(
                parameters=[
                    structlog.processors.CallsiteParameter.FUNC_NAME,
                    structlog.processors.CallsiteParameter.LINENO,
                ]
            )
        )

    if json_logs or log_file:
        processors.append(structlog.processors.format_exc_info)
    if json_logs:
        processors.append(structlog.processors.JSONRenderer(sort_keys=True))
    else:
        processors.append(structlog.dev.ConsoleRenderer(colors=log_file is None and sys.stderr.isatty()))

    _close_log_file()
    _active_writer = _TeeWriter(log_file)

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.PrintLoggerFactory(file=_active_writer),
        cache_logger_on_first_use=False,
    )

    logger = structlog.get_logger("pam_evolution")
    logger.debug(
        "logging_configured",
        log_level=log_level,
        debug_mode=debug_mode,
        log_file=log_file,
        json_logs=json_logs,
    )
    return logger


def get_logger(name: Optional[str] = None) -> FilteringBoundLogger:
    """
    Get a logger instance for a specific module.

    Args:
        name: Logger name (typically __name__)

    Returns:
        Bound structlog logger
    """
    return structlog.get_logger(name or "pam_evolution")


class LoggerMixin:
    """
    Mixin class to add logging capabilities to any class.
    """

    @property
    def logger(self) -> FilteringBoundLogger:
        """Get logger instance for this class."""
        class_name = f"{self.__class__.__module__}.{self.__class__.__name__}"
        return get_logger(class_name)

    def log_method_entry(self, method_name: str, **kwargs) -> None:
        """Log method entry with parameters."""
        self.logger.debug(f"entering_{method_name}", method=method_name, **kwargs)

    def log_method_exit(self, method_name: str, **kwargs) -> None:
        """Log method exit with results."""
        self.logger.debug(f"exiting_{method_name}", method=method_name, **kwargs)
