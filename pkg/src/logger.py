"""Console and file logging for toolkit runs."""

import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Union

_HANDLER_TAG = "_optomech_handler"

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# compiler and type-inference chatter at DEBUG
QUIET_LOGGERS = ("numba", "numba.core")


def _install(root: logging.Logger, handler: logging.Handler, formatter: logging.Formatter) -> None:
    handler.setFormatter(formatter)
    setattr(handler, _HANDLER_TAG, True)
    root.addHandler(handler)


def setup_logging(log_dir: Union[str, Path] = "logs", log_level: int = logging.INFO) -> Path:
    """
    Send records to stdout and to ``<log_dir>/optomech_<timestamp>.log``.

    Calling it again replaces the handlers it installed earlier, so repeated
    CLI invocations in one process do not duplicate output.

    Returns:
        Path of the new log file
    """
    log_path = Path(log_dir)
    log_path.mkdir(parents=True, exist_ok=True)
    log_file = log_path / f"optomech_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"

    root = logging.getLogger()
    root.setLevel(log_level)
    for handler in [h for h in root.handlers if getattr(h, _HANDLER_TAG, False)]:
        root.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    _install(root, logging.StreamHandler(sys.stdout), formatter)
    _install(root, logging.FileHandler(log_file, encoding="utf-8"), formatter)

    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)

    logging.info(f"Logging initialized. Log file: {log_file}")
    return log_file
