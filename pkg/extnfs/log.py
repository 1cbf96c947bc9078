"""Logging setup: rotating log file plus coloured console lines."""

from __future__ import annotations

import logging
from datetime import datetime
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

from colorama import Back, Fore, Style, init as colorama_init

ROOT_LOGGER = "extnfs"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"

# Console sender tag per module, as printed between the bars.
SENDERS = {
    "polyselect": "sys0",
    "factorbase": "sys1",
    "pipeline": "sys0",
    "sieve4d": "siev",
    "relproc": "rels",
    "linalg": "lina",
    "logdb": "lina",
    "descent": "desc",
}


def pretty_print(msg: str, state: str = "success", sender: str = "sys0") -> None:
    """
    Produces nicely formatted CLI output for messages:
    HH:MM:S |sender| msg
    """
    if sender.startswith("siev"):
        bg_color = Back.YELLOW
    elif sender.startswith(("lina", "desc")):
        bg_color = Back.BLUE
    elif sender.startswith("rels"):
        bg_color = Back.MAGENTA
    else:
        bg_color = Back.GREEN

    if state == "success":
        fg_color = Fore.GREEN
    elif state == "info":
        fg_color = Fore.BLUE
    elif state == "error":
        fg_color = Fore.RED
    else:
        fg_color = Fore.YELLOW

    print(
        Fore.WHITE + datetime.now().strftime(Style.DIM + "%H:%M:%S ")
        + Style.RESET_ALL + Style.BRIGHT + bg_color + " " + sender + " "
        + Style.NORMAL + Back.RESET + " " + fg_color + msg.strip()
        + Style.RESET_ALL)


class PrettyConsoleHandler(logging.Handler):
    """Route log records through pretty_print."""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            module = record.name.rsplit(".", 1)[-1]
            if record.levelno >= logging.ERROR:
                state = "error"
            elif record.levelno >= logging.WARNING:
                state = "warning"
            elif record.levelno <= logging.DEBUG:
                state = "info"
            else:
                state = "success"
            pretty_print(self.format(record), state, SENDERS.get(module, "sys0"))
        except Exception:  # pragma: no cover - logging must never raise
            self.handleError(record)


def configure_logging(log_path: Optional[Path] = None, verbose: bool = False,
                      console: bool = True) -> logging.Logger:
    """Attach the file and console handlers to the package logger once."""
    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    if logger.handlers:
        return logger

    if log_path is not None:
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handler = RotatingFileHandler(log_path, maxBytes=256_000, backupCount=3, encoding="utf-8")
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)

    if console:
        colorama_init(autoreset=True)
        logger.addHandler(PrettyConsoleHandler())
    return logger
