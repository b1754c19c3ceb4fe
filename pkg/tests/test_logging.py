"""Tests for heytingkit._logging module."""

import io
import logging

from heytingkit._logging import disable_debug, enable_debug
from heytingkit.workspace import load_document


def _handlers() -> list[logging.Handler]:
    return [h for h in logging.getLogger("heytingkit").handlers if h.name == "_heytingkit_stream"]


class TestDebugLogging:
    def test_debug_lines_reach_stream(self):
        buffer = io.StringIO()
        enable_debug(stream=buffer)
        try:
            load_document("s3")
        finally:
            disable_debug()
        assert "[heytingkit.workspace DEBUG] Read <bundled s3.json>" in buffer.getvalue()

    def test_repeated_enable_keeps_one_handler(self):
        enable_debug(stream=io.StringIO())
        enable_debug(logging.INFO, stream=io.StringIO())
        try:
            (handler,) = _handlers()
            assert handler.level == logging.INFO
        finally:
            disable_debug()
        assert _handlers() == []
        assert logging.getLogger("heytingkit").level == logging.WARNING
