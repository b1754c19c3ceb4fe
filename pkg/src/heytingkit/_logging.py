"""Debug output for scans, checks and fixture loading.

Every module logs to a child of the ``heytingkit`` logger, which stays silent
until :func:`enable_debug` attaches a stream handler. Debug lines go to stderr
so the text and JSON reports on stdout stay parseable; the CLI turns this on
with ``--debug``.
"""

from __future__ import annotations

import logging
import sys
from typing import TextIO

_package_logger = logging.getLogger("heytingkit")
_package_logger.addHandler(logging.NullHandler())

# name of the handler enable_debug installs
_HANDLER_NAME = "_heytingkit_stream"


def enable_debug(level: int = logging.DEBUG, stream: TextIO | None = None) -> None:
    """Route package log records at ``level`` or above to ``stream`` (stderr by default).

    At most one handler is installed; calling again only changes the level.
    """
    _package_logger.setLevel(level)

    for h in _package_logger.handlers:
        if getattr(h, "name", None) == _HANDLER_NAME:
            h.setLevel(level)
            return

    handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    handler.name = _HANDLER_NAME
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter("[%(name)s %(levelname)s] %(message)s"))
    _package_logger.addHandler(handler)


def disable_debug() -> None:
    """Detach the handler and drop the package logger back to WARNING."""
    _package_logger.setLevel(logging.WARNING)
    _package_logger.handlers = [
        h for h in _package_logger.handlers if getattr(h, "name", None) != _HANDLER_NAME
    ]
