"""
Shared logging utility for lumisel.

One plain, non-colored format on stderr for every module, plus the numeric
warnings numpy raises inside the estimator and the trainer. stdout is left
alone; commands never print there.

Usage:
    from utils.logging import configure_logging, get_logger, verbosity_level

    configure_logging(verbosity_level(args.verbose, args.quiet))  # once, in main.py

    logger = get_logger(__name__)
    logger.info("Built light tree with %d nodes.", tree.node_count)
"""

import logging
import sys
from typing import TextIO

_LOG_FORMAT = "%(levelname)s:     %(message)s"
_LOG_LEVEL = logging.INFO
_WARNINGS_LOGGER = "py.warnings"


def verbosity_level(verbose: bool = False, quiet: bool = False) -> int:
    """Map the global ``-v``/``-q`` flags onto a logging level."""
    if verbose:
        return logging.DEBUG
    if quiet:
        return logging.WARNING
    return _LOG_LEVEL


def configure_logging(level: int = _LOG_LEVEL, stream: TextIO | None = None) -> None:
    """
    Route the root logger and ``warnings.warn`` output through a single handler.

    Calling it again replaces the previous handler, so tests that invoke ``main``
    repeatedly do not stack duplicate lines.
    """
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(logging.Formatter(_LOG_FORMAT))
    root = logging.getLogger()
    for h in list(root.handlers):
        root.removeHandler(h)
    root.addHandler(handler)
    root.setLevel(level)

    # numpy RuntimeWarnings (overflow in exp, invalid sqrt) end up here
    logging.captureWarnings(True)
    warnings_logger = logging.getLogger(_WARNINGS_LOGGER)
    for h in list(warnings_logger.handlers):
        warnings_logger.removeHandler(h)
    warnings_logger.setLevel(level)
    warnings_logger.propagate = True


def progress_enabled(requested: bool, stream: TextIO | None = None) -> bool:
    """Whether a tqdm bar should draw: asked for, INFO visible, and ``stream`` is a terminal."""
    stream = stream or sys.stderr
    if not requested or not logging.getLogger().isEnabledFor(logging.INFO):
        return False
    isatty = getattr(stream, "isatty", None)
    return bool(isatty and isatty())


def get_logger(name: str | None = None, level: int | None = None) -> logging.Logger:
    """
    Get a logger with project-wide formatting and configuration.
    """
    logger = logging.getLogger(name)
    if level is not None:
        logger.setLevel(level)
    return logger
