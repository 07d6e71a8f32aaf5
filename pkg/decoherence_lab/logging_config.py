# decoherence_lab/logging_config.py

import logging
import os
import sys

LIBRARY_LOGGER = "decoherence_lab"


def setup_run_logger(name: str, log_file: str, console_level: str = "INFO") -> logging.Logger:
    """
    Creates and configures a dedicated logger for a single scenario run.

    DEBUG and above go to `log_file` with timestamps; `console_level` and above
    go to stdout. Nothing propagates to the root logger.

    Args:
        name: A unique name for the logger instance.
        log_file: The full path to the run's log file.
        console_level: Level name for the console handler.

    Returns:
        A configured logging.Logger instance.
    """
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    # a logger reused across runs in one process must not write to the old file
    if logger.hasHandlers():
        close_run_logger(logger)

    os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
    file_handler = logging.FileHandler(log_file, encoding="utf-8")
    file_handler.setLevel(logging.DEBUG)

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(logging.getLevelName(console_level.upper()))

    file_handler.setFormatter(logging.Formatter("%(asctime)s,%(msecs)03d - %(levelname)-8s - %(name)s - %(message)s"))
    console_handler.setFormatter(logging.Formatter("%(levelname)-8s - %(message)s"))

    logger.addHandler(file_handler)
    logger.addHandler(console_handler)
    return logger


def attach_library_logging(run_logger: logging.Logger) -> logging.Logger:
    """Routes the library's module loggers into the run logger's handlers."""
    library = logging.getLogger(LIBRARY_LOGGER)
    library.setLevel(logging.DEBUG)
    library.propagate = False
    for handler in run_logger.handlers:
        if handler not in library.handlers:
            library.addHandler(handler)
    return library


def close_run_logger(run_logger: logging.Logger) -> None:
    library = logging.getLogger(LIBRARY_LOGGER)
    for handler in list(run_logger.handlers):
        if handler in library.handlers:
            library.removeHandler(handler)
        run_logger.removeHandler(handler)
        handler.close()
    if not library.handlers:
        library.propagate = True
