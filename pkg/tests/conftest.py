from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
FIXTURES = TESTS / "fixtures"
sys.path.insert(0, str(TESTS))

from gateway_forge import builtin_library, load_model, weave  # noqa: E402


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def library():
    return builtin_library()


@pytest.fixture
def mammogrid():
    return load_model(FIXTURES / "mammogrid.gdsl")


@pytest.fixture
def healthechild():
    return load_model(FIXTURES / "healthechild.gdsl")


@pytest.fixture
def woven_mammogrid(mammogrid, library):
    return weave(mammogrid, library)[0]
