"""Console alerts for the jetspencer command line.

Alerts go through the logging system so that they reach both the Rich console
handler and the JSON log file. Reports themselves are printed on stdout by the
Typer layer; everything here lands on stderr.
"""

import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from enum import StrEnum
from shutil import get_terminal_size
from typing import Any, Final, Literal

import typer
from rich.console import Console, RenderableType
from rich.panel import Panel
from rich.text import Text
from rich.traceback import Traceback

__all__ = [
    "console",
    "debug",
    "error",
    "fatal",
    "header",
    "info",
    "panel",
    "spinner",
    "success",
    "warning",
]

console = Console(stderr=True, highlight=False)

_logger = logging.getLogger(__name__)

_FALLBACK_WIDTH: Final[int] = 80
_STATUS_BORDERS: Final[dict[str, str]] = {
    "info": "bright_black",
    "ok": "green",
    "inconclusive": "yellow",
    "error": "red",
}


class _Marker(StrEnum):
    """Rich markup of the alert markers."""

    INFO = "[bold cyan]\\[*][/bold cyan]"
    SUCCESS = "[bold green]\\[+][/bold green]"
    WARNING = "[bold yellow]\\[!][/bold yellow]"
    ERROR = "[bold red]\\[x][/bold red]"
    FATAL = "[bold red]\\[!][/bold red]"
    DEBUG = "[bold magenta]\\[>][/bold magenta]"


# *====[ Alerts ]====*


def _emit(level: int, marker: _Marker, message: str, context: dict[str, Any] | None) -> None:
    """Log `message` behind its marker, with a plain copy for the log file."""
    plain = " ".join(Text.from_markup(message).plain.split())
    _logger.log(
        level,
        f"{marker.value} {message}",
        stacklevel=3,
        extra={"extra_data": {"raw_message": plain, **(context or {})}},
    )


def info(message: str, context: dict[str, Any] | None = None) -> None:
    """Informational alert.

    Examples:
        >>> info("Prolonging [b]killing[/b] to order 3.")  # doctest: +SKIP
    """
    _emit(logging.INFO, _Marker.INFO, message, context)


def success(message: str, context: dict[str, Any] | None = None) -> None:
    """Success alert."""
    _emit(logging.INFO, _Marker.SUCCESS, message, context)


def warning(message: str, context: dict[str, Any] | None = None) -> None:
    """Warning alert, used for verdicts that are inconclusive within bounds."""
    _emit(logging.WARNING, _Marker.WARNING, message, context)


def error(
    message: str,
    *,
    exc_info: bool = False,
    context: dict[str, Any] | None = None,
) -> None:
    """Error alert, optionally followed by a Rich traceback of the active exception.

    Args:
        message: Text of the alert.
        exc_info: Print the traceback of the exception being handled.
        context: Structured context for the log file.
    """
    _emit(logging.ERROR, _Marker.ERROR, message, context)
    if exc_info and sys.exc_info()[0] is not None:
        console.print(Traceback.from_exception(*sys.exc_info(), show_locals=False))


def fatal(
    message: str,
    *,
    exit_code: int = 1,
    context: dict[str, Any] | None = None,
) -> None:
    """Critical alert followed by termination.

    Raises:
        typer.Exit: Always, with `exit_code`.

    Examples:
        >>> fatal("No system given.", exit_code=1)  # doctest: +SKIP
    """
    _emit(logging.CRITICAL, _Marker.FATAL, f"FATAL: {message}", context)
    raise typer.Exit(code=exit_code)


def debug(message: str, context: dict[str, Any] | None = None) -> None:
    """Debug alert; visible with ``-vv``."""
    _emit(logging.DEBUG, _Marker.DEBUG, message, context)


# *====[ Layout ]====*


def _terminal_width() -> int:
    try:
        return get_terminal_size().columns
    except OSError:
        return _FALLBACK_WIDTH


def header(title: str, style: str = "bold blue") -> None:
    """A rule line carrying `title`; kept out of the log file."""
    opening = f"╭───⦗  {title}  ⦘"
    fill = "─" * max(0, _terminal_width() - len(opening) - 1)
    _logger.info("", extra={"console_only": True})
    _logger.info(f"[{style}]{opening}{fill}╮[/]", extra={"console_only": True})


def panel(
    content: RenderableType | str,
    *,
    title: str | None = None,
    title_align: Literal["left", "center", "right"] = "left",
    style: Literal["info", "ok", "inconclusive", "error"] = "info",
) -> None:
    """Print `content` inside a box bordered in the colour of a report status.

    Examples:
        >>> panel("dim R_2 = 6", title="killing", style="ok")  # doctest: +SKIP
    """
    border = _STATUS_BORDERS[style]
    body = Text.from_markup(content) if isinstance(content, str) else content
    console.print(
        Panel(
            body,
            title=Text.from_markup(title) if title else None,
            title_align=title_align,
            border_style=border,
            padding=(1, 2),
            expand=True,
        )
    )


@contextmanager
def spinner(text: str = "Computing...", *, style: str = "cyan") -> Iterator[None]:
    """Show a spinner on stderr while a long rank computation runs.

    Yields:
        None.
    """
    with console.status(Text(text, style=style), spinner="dots"):
        yield
