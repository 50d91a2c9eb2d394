"""Centralized path management for the jetspencer package.

This module defines constant paths to the packaged assets and the logging
configuration so that path logic lives in a single place.
"""

from pathlib import Path
from typing import Final

__all__ = [
    "ASSETS_DIR",
    "LOGGER_DIR",
    "LOGGING_CONFIG",
    "PACKAGE_ROOT",
    "SYSTEM_SUFFIX",
    "SYSTEMS_DIR",
]

# *====[ Core Application Paths ]====*

# Root of the `jetspencer` package: the parent of this `core` directory.
PACKAGE_ROOT: Final[Path] = Path(__file__).resolve().parent.parent

# *====[ Asset Paths ]====*

ASSETS_DIR: Final[Path] = PACKAGE_ROOT / "assets"

# Sample `.pde` sources for systems outside the catalog.
SYSTEMS_DIR: Final[Path] = ASSETS_DIR / "systems"
SYSTEM_SUFFIX: Final[str] = ".pde"

# *====[ Logger Paths ]====*

LOGGER_DIR: Final[Path] = PACKAGE_ROOT / "logger"
LOGGING_CONFIG: Final[Path] = LOGGER_DIR / "logging_config.json"
