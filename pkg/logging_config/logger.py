"""
Centralized logging configuration.

Usage:
    from logging_config.logger import get_logger
    logger = get_logger(__name__)
    logger.info("Mesh built")
    logger.debug("Only shows when VERBOSE=true")
"""
import logging
import sys
from config.settings import LOG_LEVEL, VERBOSE


def _effective_level() -> int:
    if VERBOSE:
        return logging.DEBUG
    return getattr(logging, LOG_LEVEL.upper(), logging.INFO)


def get_logger(name: str) -> logging.Logger:
    """
    Get configured logger instance.

    Args:
        name: Logger name (typically __name__)

    Returns:
        Logger writing to stdout at the level chosen by LOG_LEVEL / VERBOSE
    """
    logger = logging.getLogger(name)

    if not logger.handlers:
        level = _effective_level()
        logger.setLevel(level)

        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(level)
        console_handler.setFormatter(
            logging.Formatter(
                fmt='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
                datefmt='%Y-%m-%d %H:%M:%S'
            )
        )
        logger.addHandler(console_handler)

        # Prevent propagation to root logger
        logger.propagate = False

    return logger


def set_level(level: str) -> None:
    """
    Change the level of every logger already handed out by get_logger.

    Args:
        level: Level name (DEBUG, INFO, WARNING, ERROR)
    """
    numeric = getattr(logging, level.upper(), logging.INFO)
    for existing in logging.Logger.manager.loggerDict.values():
        if isinstance(existing, logging.Logger) and existing.handlers and not existing.propagate:
            existing.setLevel(numeric)
            for handler in existing.handlers:
                handler.setLevel(numeric)
