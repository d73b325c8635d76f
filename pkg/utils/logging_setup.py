"""
Logging Setup Module for Superform Lab

This module configures the standard-library logging used by every module
of the application. It is called once by the command-line entry point;
library code only ever asks for ``logging.getLogger(__name__)``.
"""

import logging
import sys

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"
DATE_FORMAT = "%H:%M:%S"

# pandas may pull in numexpr, which announces its thread count at INFO
QUIET_LOGGERS = ("numexpr",)


def configure_logging(verbose=False, stream=None):
    """
    Install one stream handler on the root logger.

    Args:
        verbose (bool): DEBUG instead of INFO
        stream: target stream (stderr by default)

    Returns:
        logging.Logger: the root logger
    """
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)
    return root
