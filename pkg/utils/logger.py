"""
Logging setup with Loguru
"""
import os
import sys
from typing import Optional

from loguru import logger

CONSOLE_FORMAT = ("<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
                  "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>")
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}"


def setup_logging(level: str = 'INFO', log_file: Optional[str] = None):
    """Replace the default sink with a stderr sink and an optional rotating file sink"""
    logger.remove()
    logger.add(sys.stderr, level=level.upper(), format=CONSOLE_FORMAT)

    if log_file:
        directory = os.path.dirname(log_file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        logger.add(
            log_file,
            level=level.upper(),
            format=FILE_FORMAT,
            rotation="10 MB",
            retention="1 week",
            compression="zip",
        )

    logger.debug(f"Logging configured with level: {level}, file: {log_file or '-'}")
