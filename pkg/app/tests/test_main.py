"""Tests for main FastAPI application."""

import json

import pytest
from fastapi.testclient import TestClient

from app import __version__
from app.main import create_app


class TestLifespanManager:
    """Test application lifespan management."""

    @pytest.mark.unit
    def test_lifespan_startup_and_shutdown(self, settings):
        """Test the app starts and stops cleanly inside the lifespan context."""
        app = create_app(settings)
        with TestClient(app) as client:
            assert client.get("/health").status_code == 200
            assert app.state.settings is settings

    @pytest.mark.unit
    def test_app_metadata(self, settings):
        app = create_app(settings)
        assert app.version == __version__
        assert app.title == "Unramified points API"


class TestHealthEndpoint:
    @pytest.mark.unit
    def test_health_check(self, client):
        """Test the health check endpoint."""
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "healthy", "service": "unramified-points"}


class TestAnalyzeEndpoint:
    """Test POST /v1/analyze."""

    @pytest.mark.integration
    def test_rational_record(self, client, record_43):
        """Test the golden record over Q."""
        response = client.post(
            "/v1/analyze", content=record_43, headers={"Content-Type": "application/json"}
        )
        assert response.status_code == 200
        data = response.json()
        assert data["outcome"] == "implied"
        assert data["branch"] == "point"
        assert (data["v_log_P"], data["v_S"]) == ("3", "4")
        assert data["local"]["N"] == 43

    @pytest.mark.integration
    def test_quadratic_record(self, client, record_53):
        """Test the golden record over Q(sqrt(-11))."""
        response = client.post("/v1/analyze", content=record_53)
        assert response.status_code == 200
        data = response.json()
        assert data["theorem"] == "main2"
        assert (data["v_log_fP"], data["v_combined"]) == ("2", "2")

    @pytest.mark.integration
    def test_report_matches_cli(self, client, cli_runner, record_43):
        """Test HTTP and CLI reports carry identical content."""
        from app.cli import main

        http = client.post("/v1/analyze", content=record_43).json()
        cli = json.loads(cli_runner.invoke(main, ["analyze", record_43, "--json"]).stdout)
        assert http == cli


class TestScanEndpoint:
    """Test POST /v1/scan."""

    @pytest.mark.integration
    def test_scan(self, client, record_43, record_53):
        """Test a three-line corpus with one malformed line."""
        body = "\n".join([record_43, "not json", record_53])
        response = client.post("/v1/scan", content=body)
        assert response.status_code == 200
        data = response.json()
        assert [result["line"] for result in data["results"]] == [1, 2, 3]
        assert data["results"][1]["error_code"] == "PARSE_ERROR"
        assert data["summary"] == {
            "implied": 2,
            "not_implied": 0,
            "inconclusive": 0,
            "errors": 1,
        }

    @pytest.mark.unit
    def test_empty_scan(self, client):
        response = client.post("/v1/scan", content="")
        assert response.status_code == 200
        assert response.json()["results"] == []
