"""Shared fixtures for the core test suites.

Property suites draw their instances from a `random.Random` seeded by the
`rng` fixture, which is parametrized over `PROPERTY_SEEDS` seeds.
"""

import random
from typing import Final

import pytest

PROPERTY_SEEDS: Final[int] = 50


@pytest.fixture(params=range(PROPERTY_SEEDS), ids=lambda seed: f"seed{seed}")
def rng(request: pytest.FixtureRequest) -> random.Random:
    """A generator seeded per parametrized run."""
    return random.Random(request.param)  # noqa: S311
