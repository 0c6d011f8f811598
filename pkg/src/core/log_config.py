"""
Logging bootstrap.

Library modules only create loggers; handlers are installed once by the
command-line entry point.
"""

import logging
import sys
from typing import Optional

from pythonjsonlogger import jsonlogger

from .config import Settings, get_settings


TEXT_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
JSON_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


def configure_logging(
    settings: Optional[Settings] = None,
    level: Optional[str] = None,
) -> None:
    """
    Install a single stderr handler on the root logger.

    Args:
        settings: Settings to read log level and format from
        level: Explicit level overriding the settings value
    """
    settings = settings or get_settings()
    root = logging.getLogger()

    for handler in list(root.handlers):
        root.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    if settings.structured_logging and settings.log_format == "json":
        handler.setFormatter(jsonlogger.JsonFormatter(JSON_FORMAT))
    else:
        handler.setFormatter(logging.Formatter(TEXT_FORMAT))

    root.addHandler(handler)
    root.setLevel((level or settings.log_level).upper())
