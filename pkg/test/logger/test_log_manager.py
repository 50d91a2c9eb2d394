# test/logger/test_log_manager.py

# ruff: noqa: S101
"""Tests for the logging setup."""

import json
import logging
import sys
from collections.abc import Iterator
from logging.handlers import QueueHandler
from pathlib import Path
from unittest.mock import MagicMock, patch

import pytest

from jetspencer.core.paths import LOGGING_CONFIG
from jetspencer.logger.log_manager import (
    DEFAULT_LOGGING_CONFIG,
    ConsoleOnlyFilter,
    JSONFormatter,
    RichConsoleFormatter,
    console_level,
    setup_logging,
)


def _record(message: str, **extra: object) -> logging.LogRecord:
    record = logging.LogRecord("jetspencer.test", logging.INFO, "x.py", 7, message, (), None)
    for key, value in extra.items():
        setattr(record, key, value)
    return record


@pytest.fixture
def restore_root() -> Iterator[None]:
    """Put the root logger back the way the test found it."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        root.removeHandler(handler)
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)


class TestFormatters:
    """Tests for the console and file formatters."""

    def test_console_keeps_markup(self) -> None:
        """Verify the console formatter leaves Rich markup in place."""
        assert RichConsoleFormatter().format(_record("[b]rank[/b] 3")) == "[b]rank[/b] 3"

    def test_json_payload(self) -> None:
        """Verify markup is stripped and the structured context merged."""
        record = _record("[bold]dims[/bold] computed", extra_data={"dims": [3, 3, 3]})
        payload = json.loads(JSONFormatter().format(record))
        assert payload["message"] == "dims computed"
        assert payload["dims"] == [3, 3, 3]
        assert payload["level"] == "INFO"
        assert payload["line"] == 7

    def test_json_non_native_values(self) -> None:
        """Verify values JSON cannot encode are written as strings."""
        record = _record("locus", extra_data={"pivot": Path("x1")})
        assert json.loads(JSONFormatter().format(record))["pivot"] == "x1"

    def test_json_exception(self) -> None:
        """Verify exception text is included."""
        try:
            error_msg = "rank mismatch"
            raise ValueError(error_msg)  # noqa: TRY301
        except ValueError:
            record = _record("failed", exc_info=sys.exc_info())
        assert "rank mismatch" in json.loads(JSONFormatter().format(record))["exception"]


class TestFilters:
    """Tests for the console-only filter."""

    def test_console_only_rejected(self) -> None:
        """Verify flagged records are kept out of the file."""
        assert not ConsoleOnlyFilter().filter(_record("", console_only=True))
        assert ConsoleOnlyFilter().filter(_record("kept"))


class TestSetup:
    """Tests for `setup_logging`."""

    @pytest.mark.parametrize(
        ("verbosity", "level"), [(-1, "WARNING"), (0, "WARNING"), (1, "INFO"), (2, "DEBUG")]
    )
    def test_console_level(self, verbosity: int, level: str) -> None:
        """Verify the -v count maps to a console level."""
        assert console_level(verbosity) == level

    def test_shipped_config_matches_default(self) -> None:
        """Verify the packaged JSON config has the default handlers."""
        shipped = json.loads(LOGGING_CONFIG.read_text(encoding="utf-8"))
        assert shipped["handlers"].keys() == DEFAULT_LOGGING_CONFIG["handlers"].keys()

    @pytest.mark.usefixtures("restore_root")
    def test_queue_and_file(self, tmp_path: Path) -> None:
        """Verify handlers move behind a queue and records reach the file."""
        log_file = tmp_path / "logs" / "run.jsonl"
        listener = setup_logging(default_level="info", log_file=log_file)
        try:
            root = logging.getLogger()
            assert any(isinstance(handler, QueueHandler) for handler in root.handlers)
            assert listener.handlers[0].level == logging.INFO
            logging.getLogger("jetspencer.test").info(
                "ranked", extra={"extra_data": {"rank": 4}}
            )
        finally:
            listener.stop()
        lines = log_file.read_text(encoding="utf-8").splitlines()
        assert any(json.loads(line).get("rank") == 4 for line in lines)

    @pytest.mark.usefixtures("restore_root")
    @patch("jetspencer.logger.log_manager._logger")
    def test_missing_config_falls_back(self, mock_logger: MagicMock, tmp_path: Path) -> None:
        """Verify a missing config file falls back to the defaults with a warning."""
        listener = setup_logging(tmp_path / "absent.json", log_file=tmp_path / "a.jsonl")
        listener.stop()
        mock_logger.warning.assert_called_once()

    @pytest.mark.usefixtures("restore_root")
    @patch("jetspencer.logger.log_manager._logger")
    def test_invalid_config_falls_back(self, mock_logger: MagicMock, tmp_path: Path) -> None:
        """Verify malformed JSON falls back to the defaults."""
        config = tmp_path / "broken.json"
        config.write_text("{not json", encoding="utf-8")
        listener = setup_logging(config, log_file=tmp_path / "b.jsonl")
        listener.stop()
        mock_logger.exception.assert_called_once()
