import sys
from typing import Any

from .config import CONFIG

# set up logging configurations
BASE_LOGGING_CONFIG = {
    "colorize": True,
    "backtrace": False,
    "diagnose": True,
    "catch": True,
}

# logging settings for the console logs, stdout is reserved for verdicts
CONSOLE_LOGGING_CONFIG = {
    **BASE_LOGGING_CONFIG,  # type: ignore
    "level": CONFIG.logging.level,
    "sink": sys.stderr,
}

# logging settings for the log file
FILE_LOGGING_CONFIG = {
    **BASE_LOGGING_CONFIG,  # type: ignore
    "level": "DEBUG",
    "sink": CONFIG.logging.file_sink,
    "rotation": CONFIG.logging.rotation,
    "compression": CONFIG.logging.compression,
}
# Set up handlers list
HANDLERS: list[dict[str, Any]] = [FILE_LOGGING_CONFIG, CONSOLE_LOGGING_CONFIG]


def console_handlers(level: str) -> list[dict[str, Any]]:
    """handlers for a one-off CLI run with an overridden console level"""
    return [FILE_LOGGING_CONFIG, {**CONSOLE_LOGGING_CONFIG, "level": level}]
