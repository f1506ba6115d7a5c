import logging
import os
from typing import Optional, Union

from rich.console import Console
from rich.logging import RichHandler

LOG_LEVEL_ENV = "ARCHSEARCH_LOG_LEVEL"


def configure_logging(level: Optional[Union[str, int]] = None, console: Optional[Console] = None) -> None:
    """Route the package loggers through a single rich handler.

    The level falls back to the ARCHSEARCH_LOG_LEVEL environment variable, then WARNING.
    """
    if level is None:
        level = os.getenv(LOG_LEVEL_ENV, "WARNING")
    if isinstance(level, str):
        level = level.upper()

    root = logging.getLogger("archsearch_mip")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = RichHandler(console=console or Console(stderr=True), show_path=False, rich_tracebacks=True)
    handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    root.addHandler(handler)
    root.setLevel(level)
    root.propagate = False
