"""Machine-readable command reports.

A `Report` is a pydantic model whose payload holds only strings, integers,
booleans, lists and mappings; rationals are rendered ``p/q`` before they get
here, so the structured (JSON) form round-trips losslessly.
"""

import hashlib
import logging
from collections.abc import Iterator
from typing import Any, Final, Literal

from pydantic import BaseModel, ConfigDict, Field

__all__ = ["EXIT_CODES", "Report", "ReportInput", "Status", "digest"]

_logger = logging.getLogger(__name__)

Status = Literal["ok", "inconclusive", "error"]

EXIT_CODES: Final[dict[str, int]] = {"ok": 0, "error": 1, "inconclusive": 2}

_INDENT: Final[str] = "  "


def digest(text: str) -> str:
    """SHA-256 hex digest of a rendered source.

    Examples:
        >>> digest("")[:12]
        'e3b0c44298fc'
    """
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class ReportInput(BaseModel):
    """The analysed source: its name and the digest of its rendered text."""

    model_config = ConfigDict(frozen=True)

    name: str
    sha256: str


class Report(BaseModel):
    """Outcome of one command.

    Attributes:
        command: The command that ran.
        input: Source identification; None for commands without a system.
        status: "ok", "inconclusive" (bounds exhausted) or "error".
        result: Command payload.
        certificates: Ranks, orders and loci that back the verdicts.
        bounds: Bounds in force.
        elapsed_ms: Wall time in whole milliseconds.
        message: Human-readable remark; the error text on failure.
    """

    model_config = ConfigDict(frozen=True)

    command: str
    input: ReportInput | None = None
    status: Status = "ok"
    result: dict[str, Any] = Field(default_factory=dict)
    certificates: dict[str, Any] = Field(default_factory=dict)
    bounds: dict[str, Any] = Field(default_factory=dict)
    elapsed_ms: int = Field(default=0, ge=0)
    message: str = ""

    @property
    def exit_code(self) -> int:
        """0 for ok, 2 for inconclusive, 1 for error."""
        return EXIT_CODES[self.status]

    def to_structured(self) -> str:
        """The JSON document of the report.

        Examples:
            >>> report = Report(command="catalog-list", result={"names": ["screw"]})
            >>> Report.from_structured(report.to_structured()) == report
            True
        """
        return self.model_dump_json(indent=2)

    @classmethod
    def from_structured(cls, text: str) -> "Report":
        """Read a report back from `to_structured` output."""
        return cls.model_validate_json(text)

    def to_text(self) -> str:
        """An indented plain-text rendering for terminals.

        Examples:
            >>> print(Report(command="cc", result={"count": 1}).to_text())
            command: cc
            status: ok
            result:
              count: 1
            elapsed_ms: 0
        """
        lines = [f"command: {self.command}"]
        if self.input is not None:
            lines.append(f"input: {self.input.name} (sha256 {self.input.sha256[:16]})")
        lines.append(f"status: {self.status}")
        if self.message:
            lines.append(f"message: {self.message}")
        for title, section in (
            ("result", self.result),
            ("certificates", self.certificates),
            ("bounds", self.bounds),
        ):
            if section:
                lines.append(f"{title}:")
                lines.extend(_text_lines(section, 1))
        lines.append(f"elapsed_ms: {self.elapsed_ms}")
        return "\n".join(lines)


def _scalar(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return "null" if value is None else str(value)


def _is_flat(value: list[Any]) -> bool:
    return all(not isinstance(item, dict | list) for item in value)


def _text_lines(value: Any, depth: int) -> Iterator[str]:
    pad = _INDENT * depth
    if isinstance(value, dict):
        for key, item in value.items():
            if isinstance(item, dict) and item:
                yield f"{pad}{key}:"
                yield from _text_lines(item, depth + 1)
            elif isinstance(item, list) and item and not _is_flat(item):
                yield f"{pad}{key}:"
                yield from _text_lines(item, depth + 1)
            elif isinstance(item, list):
                if any(isinstance(entry, str) and " " in entry for entry in item):
                    yield f"{pad}{key}:"
                    yield from (f"{pad}{_INDENT}- {_scalar(entry)}" for entry in item)
                else:
                    yield f"{pad}{key}: [{', '.join(_scalar(entry) for entry in item)}]"
            else:
                yield f"{pad}{key}: {_scalar(item)}"
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, dict | list):
                yield f"{pad}-"
                yield from _text_lines(item, depth + 1)
            else:
                yield f"{pad}- {_scalar(item)}"
    else:
        yield f"{pad}{_scalar(value)}"
