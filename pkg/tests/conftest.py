from __future__ import annotations

from pathlib import Path

import pytest

from dune.kb import load_kb_file
from dune.session import read_features_file

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "dune" / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture()
def kb_run1():
    return load_kb_file(FIXTURES / "kb_run1.dune").ensure()


@pytest.fixture()
def kb_run2():
    return load_kb_file(FIXTURES / "kb_run2.dune").ensure()


@pytest.fixture()
def run1_features() -> list[str]:
    return read_features_file(FIXTURES / "run1.features")


@pytest.fixture()
def run2_features() -> list[str]:
    return read_features_file(FIXTURES / "run2.features")
