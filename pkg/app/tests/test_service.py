"""Tests for the analysis service and corpus scans."""

import pickle
from pathlib import Path

import pytest

import app.service as service_module
from app.errors import ConditionFailed, ParseError
from app.models import parse_record
from app.service import AnalysisService


SAMPLE_CORPUS = Path(__file__).parents[2] / "scripts" / "sample_corpus.jsonl"


@pytest.fixture
def service(settings):
    return AnalysisService(settings)


@pytest.mark.integration
class TestAnalyze:
    """Test single-record analysis."""

    def test_rational_golden(self, service, record_43):
        report = service.analyze(parse_record(record_43))
        assert report.theorem == "main1"
        assert report.implies_nonvanishing
        assert report.branch == "point"
        assert (report.v_log_P, report.v_S, report.v_combined) == ("3", "4", "4")
        assert report.local.N == 43
        assert report.log["v_log"] == "3"

    def test_quadratic_golden(self, service, record_53):
        report = service.analyze(parse_record(record_53))
        assert report.theorem == "main2"
        assert report.d == 11
        assert (report.v_log_fP, report.v_combined) == ("2", "2")
        assert (report.a_p, report.count) == (4, 28)
        assert report.v_S is None

    def test_deterministic_output(self, service, record_43):
        first = service.analyze(parse_record(record_43)).model_dump_json()
        second = service.analyze(parse_record(record_43)).model_dump_json()
        assert first == second

    def test_condition_failure(self, service, heegner_c_failing_record):
        with pytest.raises(ConditionFailed):
            service.analyze(parse_record(heegner_c_failing_record))

    def test_dispatch_by_field(self, service, record_43, record_53, mocker):
        """Records naming a field go to the criterion over K, the rest to the one over Q."""
        over_Q = mocker.spy(service_module, "verdict_Q")
        over_K = mocker.spy(service_module, "verdict_K")
        service.analyze(parse_record(record_53))
        assert (over_Q.call_count, over_K.call_count) == (0, 1)
        service.analyze(parse_record(record_43))
        assert (over_Q.call_count, over_K.call_count) == (1, 1)


@pytest.mark.integration
class TestScan:
    """Test corpus scans."""

    def test_results_follow_input_order(self, service, record_43, record_53):
        results, summary = service.scan_all([record_53, record_43])
        assert [result["line"] for result in results] == [1, 2]
        assert [result["theorem"] for result in results] == ["main2", "main1"]
        assert summary.implied == 2

    def test_malformed_line_becomes_error_record(self, service, record_43):
        results, summary = service.scan_all([record_43, "{broken", "", record_43])
        assert [result["line"] for result in results] == [1, 2, 3, 4]
        assert results[1]["error_code"] == "PARSE_ERROR"
        assert results[1]["success"] is False
        assert results[2]["error_code"] == "PARSE_ERROR"
        assert (summary.implied, summary.errors) == (2, 2)

    def test_condition_failure_is_reported(self, service, heegner_c_failing_record):
        results, summary = service.scan_all([heegner_c_failing_record])
        assert results[0]["error_code"] == "HEEGNER_C_FAILED"
        assert summary.errors == 1

    def test_empty_corpus(self, service):
        results, summary = service.scan_all([])
        assert results == []
        assert summary.model_dump() == {
            "implied": 0,
            "not_implied": 0,
            "inconclusive": 0,
            "errors": 0,
        }

    def test_strict_mode_raises(self, settings):
        service = AnalysisService(settings.with_overrides(strict=True))
        with pytest.raises(ParseError):
            service.scan_all(["{broken"])

    def test_trailing_newlines_are_ignored(self, service, record_43):
        results, _ = service.scan_all([record_43 + "\n"])
        assert results[0]["outcome"] == "implied"

    @pytest.mark.slow
    def test_parallel_scan_matches_serial(self, settings, record_43, record_53):
        lines = [record_43, "{broken", record_53, record_43]
        serial, _ = AnalysisService(settings).scan_all(lines)
        parallel, _ = AnalysisService(settings.with_overrides(workers=2)).scan_all(lines)
        assert parallel == serial


@pytest.mark.unit
class TestErrorPickling:
    """Errors cross process boundaries during parallel scans."""

    def test_round_trip(self):
        error = ConditionFailed("heegner_c", "p is inert", ledger={"heegner_c": "x"})
        restored = pickle.loads(pickle.dumps(error))
        assert type(restored) is ConditionFailed
        assert restored.which == "heegner_c"
        assert restored.to_response() == error.to_response()


@pytest.mark.integration
class TestSampleCorpus:
    """The corpus shipped with the smoke-test script."""

    def test_summary(self, service):
        results, summary = service.scan_all(SAMPLE_CORPUS.read_text().splitlines())
        assert summary.model_dump() == {
            "implied": 2,
            "not_implied": 0,
            "inconclusive": 1,
            "errors": 1,
        }
        assert results[2]["error_code"] == "HEEGNER_C_FAILED"
        assert results[3]["blocked_by"] == ["generator"]
