"""Logging configuration for the FairWASP command-line tools."""
import logging
import os
import sys
from datetime import datetime
from logging.handlers import RotatingFileHandler
from typing import Optional

from fairwasp.config import (
    LOGS_DIR, LOG_LEVEL, LOG_MAX_SIZE, LOG_BACKUP_COUNT, LOG_TO_FILE,
    LOG_LEVEL_ENV, get_setting
)

LEVEL_MAP = {
    'DEBUG': logging.DEBUG,
    'INFO': logging.INFO,
    'WARNING': logging.WARNING,
    'ERROR': logging.ERROR,
    'CRITICAL': logging.CRITICAL
}


def resolve_level(level: Optional[str] = None) -> int:
    """Resolve the effective log level.

    Args:
        level: Explicit level name; wins over FAIRWASP_LOG and settings

    Returns:
        A logging module level constant
    """
    level_str = level or os.getenv(LOG_LEVEL_ENV) or get_setting('logging.level', LOG_LEVEL)
    return LEVEL_MAP.get(str(level_str).upper(), logging.INFO)


def setup_logging(level: Optional[str] = None, log_to_file: Optional[bool] = None):
    """Configure the root logger.

    Console output goes to stderr; stdout carries command output only.
    """
    resolved = resolve_level(level)
    if log_to_file is None:
        log_to_file = get_setting('logging.log_to_file', LOG_TO_FILE)
    max_size = get_setting('logging.max_file_size', LOG_MAX_SIZE)
    backup_count = get_setting('logging.backup_count', LOG_BACKUP_COUNT)

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(resolved)
    root_logger.handlers = []

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(resolved)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if log_to_file:
        LOGS_DIR.mkdir(parents=True, exist_ok=True)
        log_file = LOGS_DIR / f"fairwasp_{datetime.now().strftime('%Y%m%d')}.log"

        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=max_size,
            backupCount=backup_count,
            encoding='utf-8'
        )
        file_handler.setLevel(resolved)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

        error_handler = RotatingFileHandler(
            LOGS_DIR / "errors.log",
            maxBytes=max_size,
            backupCount=backup_count,
            encoding='utf-8'
        )
        error_handler.setLevel(logging.ERROR)
        error_handler.setFormatter(formatter)
        root_logger.addHandler(error_handler)

    # Set levels for noisy libraries
    logging.getLogger('matplotlib').setLevel(logging.WARNING)
    logging.getLogger('numexpr').setLevel(logging.WARNING)

    logging.debug(f"Logging initialized at {logging.getLevelName(resolved)} level")
    if log_to_file:
        logging.debug(f"Log files in: {LOGS_DIR}")
