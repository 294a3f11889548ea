"""Tests for curve records and analysis reports."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.arith import Val
from app.errors import ParseError
from app.models import (
    AnalysisReport,
    Assertions,
    CurveRecord,
    FieldSpec,
    ScanSummary,
    parse_record,
    serialize_record,
)


GOOD_CURVES = [[0, 1, 1, 0, 0], [1, -1, 1, 0, 0], [0, -1, 1, -10, -20], [0, 0, 1, -1, 0]]

records = st.builds(
    CurveRecord,
    label=st.none() | st.text(max_size=12),
    ainvs=st.sampled_from(GOOD_CURVES),
    p=st.sampled_from([3, 5, 7, 13, 31, 101]),
    point=st.none() | st.just("O"),
    rank_an=st.integers(0, 3),
    v_sha=st.none() | st.integers(0, 6),
    field=st.none() | st.sampled_from([1, 2, 3, 7, 11]).map(lambda d: FieldSpec(d=d)),
    assertions=st.none()
    | st.builds(
        Assertions,
        imc=st.none() | st.booleans(),
        height=st.none() | st.booleans(),
        pairing=st.none() | st.booleans(),
    ),
    v_l_alg=st.none() | st.integers(0, 6),
)


def record_json(**fields) -> str:
    base = {"ainvs": [0, 1, 1, 0, 0], "p": 13, "point": ["0", "0"], "rank_an": 1}
    return json.dumps({**base, **fields})


@pytest.mark.unit
class TestCurveRecord:
    """Test parsing curve records."""

    def test_valid_rational_record(self, record_43):
        record = parse_record(record_43)
        assert record.ainvs == [0, 1, 1, 0, 0]
        assert record.curve().discriminant == -43
        assert str(record.curve_point()) == "(0, 0)"
        assert record.field is None

    def test_valid_quadratic_record(self, record_53):
        record = parse_record(record_53)
        assert record.field.d == 11
        assert record.curve_point().field is None

    def test_quadratic_point(self):
        point = [{"u": "-2", "v": "0", "d": 47}, {"u": "1/2", "v": "1/2", "d": 47}]
        line = {"ainvs": [1, -1, 1, 0, 0], "p": 3, "point": point, "rank_an": 1}
        record = parse_record(json.dumps({**line, "field": {"d": 47}}))
        assert record.curve_point().field == 47

    def test_analytic_inputs_defaults(self, record_43):
        inputs = parse_record(record_43).analytic_inputs()
        assert inputs.r_an == 1
        assert inputs.v_sha == 0
        assert inputs.imc_assumed and inputs.height_nontrivial_assumed
        assert inputs.defaulted_flags == ("imc", "height", "pairing")

    def test_analytic_inputs_assertions(self):
        record = parse_record(
            record_json(v_sha=2, v_l_alg=2, assertions={"imc": True, "pairing": False})
        )
        inputs = record.analytic_inputs()
        assert inputs.v_sha == Val.of(2)
        assert inputs.v_L_alg == 2
        assert not inputs.pairing_nonzero_assumed
        assert inputs.defaulted_flags == ("height",)

    @pytest.mark.parametrize(
        "fields, field",
        [
            ({"ainvs": [0, 0, 0, 0, 0]}, "ainvs"),
            ({"ainvs": [0, 1, 1, 0]}, "ainvs"),
            ({"p": 2}, "p"),
            ({"p": 15}, "p"),
            ({"field": {"d": 4}}, "field.d"),
            ({"v_sha": -1}, "v_sha"),
            ({"unknown": 1}, "unknown"),
            ({"point": ["0"]}, "point"),
        ],
    )
    def test_rejects_invalid_fields(self, fields, field):
        with pytest.raises(ParseError) as exc_info:
            parse_record(record_json(**fields), line_number=7)
        assert exc_info.value.field == field
        assert exc_info.value.line == 7
        assert exc_info.value.to_response().error_code == "PARSE_ERROR"

    def test_missing_rank(self):
        with pytest.raises(ParseError) as exc_info:
            parse_record(json.dumps({"ainvs": [0, 1, 1, 0, 0], "p": 13}))
        assert exc_info.value.field == "rank_an"

    def test_point_off_curve(self):
        with pytest.raises(ParseError) as exc_info:
            parse_record(record_json(point=["1", "2"]))
        assert exc_info.value.field is None
        assert "does not lie on" in exc_info.value.message

    def test_point_field_must_match(self):
        point = [{"u": "0", "v": "0", "d": 7}, {"u": "0", "v": "0", "d": 7}]
        with pytest.raises(ParseError):
            parse_record(record_json(point=point, field={"d": 11}))

    def test_invalid_json(self):
        with pytest.raises(ParseError) as exc_info:
            parse_record("{not json", line_number=3)
        assert exc_info.value.line == 3

    @given(records)
    def test_serialize_round_trip(self, record):
        assert parse_record(serialize_record(record)) == record


@pytest.mark.unit
class TestScanSummary:
    """Test the per-outcome counters."""

    def test_counts(self):
        summary = ScanSummary()
        for line in (
            {"outcome": "implied"},
            {"outcome": "implied"},
            {"outcome": "inconclusive"},
            {"success": False, "error_code": "PARSE_ERROR"},
        ):
            summary.add(line)
        assert summary.model_dump() == {
            "implied": 2,
            "not_implied": 0,
            "inconclusive": 1,
            "errors": 1,
        }


@pytest.mark.unit
class TestAnalysisReport:
    """Test the report key order."""

    def test_key_order_is_fixed(self):
        keys = list(AnalysisReport.model_fields)
        assert keys[:7] == [
            "label",
            "ainvs",
            "p",
            "d",
            "theorem",
            "implies_nonvanishing",
            "outcome",
        ]
        assert keys[-1] == "warnings"
