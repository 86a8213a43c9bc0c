"""
Logging configuration module.

This module configures the loguru logger for the entire application,
providing consistent logging across all components.
"""

import logging
import os
import sys
from datetime import datetime

from loguru import logger

from custom_types import LogLevels
from settings import settings


class LibraryLogHandler(logging.Handler):
    """Forwards records of stdlib loggers (libraries, captured warnings) to loguru."""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            level: str | int = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        origin = {"name": record.name, "function": record.funcName, "line": record.lineno}
        logger.patch(lambda r: r.update(origin)).opt(exception=record.exc_info).log(
            level, record.getMessage()
        )


def setup_logging(
    level: LogLevels = "INFO",
    log_dir: str | None = None,
    to_file: bool | None = None,
) -> None:
    """
    Set up application logging configuration.

    Args:
        level: The minimum log level to capture. Default is "INFO".
            Valid options are "TRACE", "DEBUG", "INFO", "SUCCESS",
            "WARNING", "ERROR", "CRITICAL".
        log_dir: Directory for the rotating log file. Defaults to
            ``settings.LOG_DIR``.
        to_file: Whether to add the file sink. Defaults to
            ``settings.LOG_TO_FILE``.
    """
    logger.remove()

    logging.basicConfig(handlers=[LibraryLogHandler()], level=logging.WARNING, force=True)
    logging.captureWarnings(True)

    # Add console handler with color
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>",  # noqa: E501
        level=level,
        colorize=True,
    )

    if to_file if to_file is not None else settings.LOG_TO_FILE:
        directory = log_dir or settings.LOG_DIR
        os.makedirs(directory, exist_ok=True)
        current_date = datetime.now().strftime("%Y-%m-%d")
        logger.add(
            os.path.join(directory, f"bpdec_{current_date}.log"),
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}",  # noqa: E501
            level=level,
            rotation="00:00",
            compression="zip",
            retention="30 days",
        )

    logger.debug("Logging system initialized")
