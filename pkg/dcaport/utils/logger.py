"""
Logging configuration and utilities for dcaport.

Provides one process-wide logger with configurable level and optional file
output. Console output goes to stderr so that reports written to stdout stay
machine-readable.
"""

import logging
import sys
from pathlib import Path
from typing import Optional, Union

CONSOLE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
FILE_FORMAT = ('%(asctime)s - %(name)s - %(levelname)s - '
               '%(filename)s:%(lineno)d - %(message)s')
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


class DcaportLogger:
    """
    Centralized logger for dcaport.

    Holds the single ``dcaport`` logger and its handlers so that repeated
    configuration never duplicates output.
    """

    _instance = None

    def __new__(cls):
        """Implement singleton pattern for logger."""
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        """Initialize logger if not already initialized."""
        if not hasattr(self, '_initialized'):
            self._initialized = True
            self.logger = logging.getLogger('dcaport')
            self.logger.propagate = False
            self._setup_logger()

    def _setup_logger(self, level: str = 'INFO',
                      log_file: Optional[Path] = None,
                      console: bool = True) -> None:
        """
        Configure the logger with handlers and formatters.

        Args:
            level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
            log_file: Optional path to log file
            console: Whether to log to stderr
        """
        for handler in list(self.logger.handlers):
            self.logger.removeHandler(handler)
            handler.close()

        numeric_level = getattr(logging, str(level).upper(), logging.INFO)
        self.logger.setLevel(numeric_level)

        if console:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setLevel(numeric_level)
            console_handler.setFormatter(
                logging.Formatter(CONSOLE_FORMAT, datefmt=DATE_FORMAT)
            )
            self.logger.addHandler(console_handler)

        if log_file:
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(
                logging.Formatter(FILE_FORMAT, datefmt=DATE_FORMAT)
            )
            self.logger.addHandler(file_handler)
            # the file keeps the full trace even at a quieter console level
            self.logger.setLevel(min(numeric_level, logging.DEBUG))

        if not self.logger.handlers:
            self.logger.addHandler(logging.NullHandler())

    def configure(self, level: str = 'INFO',
                  log_file: Optional[Union[str, Path]] = None,
                  console: bool = True) -> None:
        """
        Reconfigure level and handlers.

        Args:
            level: Logging level name
            log_file: Optional path to log file
            console: Whether to log to stderr
        """
        self._setup_logger(level, Path(log_file) if log_file else None,
                           console)

    def get_logger(self) -> logging.Logger:
        """
        Get the configured logger instance.

        Returns:
            logging.Logger: Configured logger
        """
        return self.logger


def get_logger() -> logging.Logger:
    """
    Get the dcaport logger instance.

    Returns:
        logging.Logger: Configured logger instance
    """
    return DcaportLogger().get_logger()


def configure_logging(level: str = 'INFO',
                      log_file: Optional[Union[str, Path]] = None,
                      console: bool = True) -> logging.Logger:
    """
    Apply the ``logging`` configuration section.

    Args:
        level: Logging level name
        log_file: Optional log file path
        console: Whether to log to stderr

    Returns:
        logging.Logger: The reconfigured logger
    """
    wrapper = DcaportLogger()
    wrapper.configure(level, log_file, console)
    return wrapper.get_logger()
