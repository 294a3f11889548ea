"""Test configuration and shared fixtures.

FIXTURE USAGE:
- Use curve_43 / curve_53 for the two rank-one curves the golden tests are built on
- Use record_43 / record_53 for the matching JSONL records
- Use settings for a fast, deterministic configuration
- Use client for the FastAPI app and cli_runner for the click front end
"""

import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from app.elliptic import CurvePoint, WeierstrassModel, invariants
from app.settings import Settings


RECORD_43 = {"ainvs": [0, 1, 1, 0, 0], "p": 13, "point": ["0", "0"], "rank_an": 1}
RECORD_53 = {
    "ainvs": [1, -1, 1, 0, 0],
    "p": 31,
    "point": ["0", "0"],
    "rank_an": 1,
    "field": {"d": 11},
}


@pytest.fixture
def curve_43() -> WeierstrassModel:
    """y^2 + y = x^3 + x^2, conductor 43."""
    return invariants(0, 1, 1, 0, 0)


@pytest.fixture
def curve_53() -> WeierstrassModel:
    """y^2 + xy + y = x^3 - x^2, conductor 53."""
    return invariants(1, -1, 1, 0, 0)


@pytest.fixture
def origin() -> CurvePoint:
    """(0, 0), a generator of the Mordell-Weil group of both curves."""
    return CurvePoint(0, 0)


@pytest.fixture
def record_43() -> str:
    return json.dumps(RECORD_43)


@pytest.fixture
def record_53() -> str:
    return json.dumps(RECORD_53)


@pytest.fixture
def heegner_c_failing_record() -> str:
    """53.a1 at 31 with K = Q(i): 31 is inert in Q(i)."""
    return json.dumps({**RECORD_53, "field": {"d": 1}})


@pytest.fixture
def settings() -> Settings:
    return Settings(ell_max=200, workers=1, strict=False, log_level="WARNING")


@pytest.fixture
def client(settings):
    """FastAPI test client with the shared settings."""
    from app.main import create_app

    return TestClient(create_app(settings), raise_server_exceptions=False)


@pytest.fixture
def cli_runner() -> CliRunner:
    return CliRunner()
