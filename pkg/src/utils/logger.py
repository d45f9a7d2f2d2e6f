"""
Logging setup for the audit toolkit: a rotating log file that keeps every
DEBUG record, plus a console stream on stderr at the requested level.
"""
import logging
import logging.handlers
import sys
from pathlib import Path

from config.settings import (
    LOG_BACKUP_COUNT, LOG_DATE_FORMAT, LOG_FILE_PATH, LOG_FORMAT, LOG_LEVEL, MAX_LOG_SIZE_MB,
)

CONSOLE_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
CONSOLE_DATE_FORMAT = '%H:%M:%S'

# Libraries that log per request or per glyph
QUIET_LIBRARIES = ('aiohttp', 'asyncio', 'matplotlib', 'PIL')


def _rotating_file_handler(log_file, max_size_mb, backup_count):
    Path(log_file).parent.mkdir(parents=True, exist_ok=True)
    handler = logging.handlers.RotatingFileHandler(
        filename=log_file,
        maxBytes=max_size_mb * 1024 * 1024,
        backupCount=backup_count,
        encoding='utf-8'
    )
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT))
    return handler


def _console_handler(level_name):
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(getattr(logging, level_name, logging.INFO))
    if level_name == "DEBUG":
        handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT))
    else:
        handler.setFormatter(logging.Formatter(CONSOLE_FORMAT, CONSOLE_DATE_FORMAT))
    return handler


def setup_logging(log_level=None, log_file=None, max_size_mb=None, backup_count=None,
                  console_output=True):
    """
    Replace the root logger's handlers with the toolkit's file and console handlers.

    Args:
        log_level: Level name for the console (default: LOG_LEVEL)
        log_file: Log file path (default: LOG_FILE_PATH); an empty string disables the file
        max_size_mb: Rotation size (default: MAX_LOG_SIZE_MB)
        backup_count: Rotated files to keep (default: LOG_BACKUP_COUNT)
        console_output: Also log to stderr

    Returns:
        logging.Logger: the root logger
    """
    level_name = (log_level or LOG_LEVEL).upper()
    log_file = LOG_FILE_PATH if log_file is None else log_file

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    root.setLevel(logging.DEBUG if log_file else getattr(logging, level_name, logging.INFO))

    if log_file:
        try:
            root.addHandler(_rotating_file_handler(
                log_file, max_size_mb or MAX_LOG_SIZE_MB, backup_count or LOG_BACKUP_COUNT
            ))
        except OSError as e:
            print(f"❌ Cannot open log file {log_file}: {e} (console only)", file=sys.stderr)
            log_file = ""

    if console_output:
        root.addHandler(_console_handler(level_name))

    library_level = logging.INFO if level_name == "DEBUG" else logging.WARNING
    for name in QUIET_LIBRARIES:
        logging.getLogger(name).setLevel(library_level)

    root.debug(f"📁 Log file: {log_file or 'disabled'}, console level {level_name}")
    return root


def log_statistics(logger, title, stats_dict):
    """Log a stage's counters as a framed block."""
    logger.info(f"📊 {title.upper()}")
    logger.info("=" * 40)
    for key, value in stats_dict.items():
        logger.info(f"📈 {str(key).replace('_', ' ').title()}: {value}")
    logger.info("=" * 40)


__all__ = ['setup_logging', 'log_statistics']
