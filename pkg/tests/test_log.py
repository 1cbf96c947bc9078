from __future__ import annotations

import logging
from pathlib import Path

import pytest

from extnfs.log import ROOT_LOGGER, PrettyConsoleHandler, configure_logging, pretty_print


@pytest.fixture
def clean_root_logger():
    logger = logging.getLogger(ROOT_LOGGER)
    saved = logger.handlers[:], logger.level
    logger.handlers = []
    yield logger
    for handler in logger.handlers:
        handler.close()
    logger.handlers, level = saved
    logger.setLevel(level)


def test_pretty_print_shows_sender_and_message(capsys: pytest.CaptureFixture) -> None:
    pretty_print("  1234 relations  ", "info", "siev")
    out = capsys.readouterr().out
    assert " siev " in out
    assert "1234 relations" in out and "relations  " not in out


def test_console_handler_uses_module_sender(capsys: pytest.CaptureFixture) -> None:
    record = logging.LogRecord("extnfs.descent", logging.WARNING, __file__, 1, "node stuck", None, None)
    PrettyConsoleHandler().emit(record)
    out = capsys.readouterr().out
    assert " desc " in out and "node stuck" in out


def test_configure_logging_attaches_handlers_once(tmp_path: Path, clean_root_logger) -> None:
    log_path = tmp_path / "logs" / "extnfs.log"
    logger = configure_logging(log_path, verbose=True, console=False)
    assert logger.level == logging.DEBUG
    assert len(logger.handlers) == 1
    configure_logging(log_path, verbose=False)
    assert len(logger.handlers) == 1
    assert logger.level == logging.INFO
    logging.getLogger(f"{ROOT_LOGGER}.pipeline").info("Stage sieve done")
    logger.handlers[0].flush()
    assert "[INFO] Stage sieve done" in log_path.read_text(encoding="utf-8")
