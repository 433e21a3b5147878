from __future__ import annotations

from pathlib import Path

import pytest

from bibsearch.engine import Engine, SourcePaths

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def fixture_engine() -> Engine:
    return Engine.from_sources(SourcePaths.in_dir(FIXTURES))
