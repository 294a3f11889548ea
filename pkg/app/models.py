"""Pydantic models for curve records (JSONL input) and analysis reports (JSON output)."""

from typing import Any

import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .arith import Val, require_imaginary_field, require_odd_prime
from .criteria import AnalyticInputs, Verdict
from .elliptic import CurvePoint, WeierstrassModel, curve_from_ainvs, on_curve, parse_point
from .errors import AnalysisError, ParseError


logger = structlog.get_logger()


class FieldSpec(BaseModel):
    """The imaginary quadratic field Q(sqrt(-d))."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    d: int

    @field_validator("d")
    @classmethod
    def validate_d(cls, v: int) -> int:
        try:
            require_imaginary_field(v)
        except AnalysisError as e:
            raise ValueError(e.message)
        return v


class Assertions(BaseModel):
    """User assertions standing in for hypotheses that cannot be checked here."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    imc: bool | None = None
    height: bool | None = None
    pairing: bool | None = None


class CurveRecord(BaseModel):
    """One line of a corpus: a curve, a prime, an optional point and the analytic inputs."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    label: str | None = None
    ainvs: list[int] = Field(min_length=5, max_length=5)
    p: int
    point: Any = None
    rank_an: int
    v_sha: int | None = Field(default=None, ge=0)
    field: FieldSpec | None = None
    assertions: Assertions | None = None
    v_l_alg: int | None = Field(default=None, ge=0)

    @field_validator("ainvs")
    @classmethod
    def validate_ainvs(cls, v: list[int]) -> list[int]:
        try:
            curve_from_ainvs(v)
        except AnalysisError as e:
            raise ValueError(e.message)
        return v

    @field_validator("p")
    @classmethod
    def validate_p(cls, v: int) -> int:
        try:
            require_odd_prime(v)
        except AnalysisError as e:
            raise ValueError(e.message)
        return v

    @field_validator("point")
    @classmethod
    def validate_point(cls, v: Any) -> Any:
        if v is None:
            return v
        try:
            parse_point(v)
        except (AnalysisError, TypeError) as e:
            raise ValueError(getattr(e, "message", str(e)))
        return v

    @model_validator(mode="after")
    def point_matches_curve(self) -> "CurveRecord":
        P = self.curve_point()
        if P is None:
            return self
        if P.field is not None and (self.field is None or self.field.d != P.field):
            raise ValueError(f"point lies over Q(sqrt(-{P.field})) but the record field differs")
        if not on_curve(self.curve(), P):
            raise ValueError(f"point {P} does not lie on {self.curve()}")
        return self

    def curve(self) -> WeierstrassModel:
        return curve_from_ainvs(self.ainvs)

    def curve_point(self) -> CurvePoint | None:
        return None if self.point is None else parse_point(self.point)

    def analytic_inputs(self) -> AnalyticInputs:
        """Inputs for the verdict engines; missing assertions default to true and are flagged."""
        assertions = self.assertions or Assertions()
        defaulted = tuple(
            name for name in ("imc", "height", "pairing") if getattr(assertions, name) is None
        )
        return AnalyticInputs(
            r_an=self.rank_an,
            v_sha=Val.of(self.v_sha or 0),
            imc_assumed=assertions.imc is not False,
            height_nontrivial_assumed=assertions.height is not False,
            pairing_nonzero_assumed=assertions.pairing is not False,
            v_L_alg=None if self.v_l_alg is None else Val.of(self.v_l_alg),
            defaulted_flags=defaulted,
        )


def parse_record(line: str, line_number: int | None = None) -> CurveRecord:
    """Validate one JSON object; errors carry the line number and the offending field path."""
    try:
        return CurveRecord.model_validate_json(line)
    except ValidationError as e:
        error = e.errors()[0]
        field = ".".join(str(loc) for loc in error["loc"]) or None
        message = f"{field}: {error['msg']}" if field else error["msg"]
        logger.debug("Record rejected", line=line_number, field=field, error=error["msg"])
        raise ParseError(message, line=line_number, field=field)


def serialize_record(record: CurveRecord) -> str:
    return record.model_dump_json(exclude_none=True)


class LocalSummaryPayload(BaseModel):
    N: int
    tam: int
    per_prime: list[dict[str, Any]]


class AnalysisReport(BaseModel):
    """Verdict JSON with a fixed key order so identical inputs give identical bytes."""

    label: str | None = None
    ainvs: list[int]
    p: int
    d: int | None = None
    theorem: str
    implies_nonvanishing: bool
    outcome: str
    branch: str | None = None
    v_log_P: str
    v_log_fP: str
    v_S: str | None = None
    v_S_p: str | None = None
    v_combined: str
    v_LBDP: str | None = None
    v_alpha_minus_beta: str | None = None
    v_euler_factor: str | None = None
    v_log_P_source: str
    witness: str | None = None
    blocked_by: list[str] = Field(default_factory=list)
    ledger: dict[str, dict[str, str]]
    a_p: int | None = None
    count: int | None = None
    local: LocalSummaryPayload | None = None
    irreducibility_witness: int | None = None
    log: dict[str, Any] | None = None
    baseline_implies: bool | None = None
    l_alg_consistent: bool | None = None
    warnings: list[str] = Field(default_factory=list)

    @classmethod
    def from_verdict(cls, record: CurveRecord, verdict: Verdict) -> "AnalysisReport":
        report = verdict.report
        combined = report.v_LS_combined if verdict.theorem == "main1" else report.v_LBDP_combined
        return cls(
            label=record.label,
            ainvs=list(record.ainvs),
            p=verdict.p,
            d=verdict.d,
            theorem=verdict.theorem,
            implies_nonvanishing=verdict.implies_nonvanishing,
            outcome=verdict.outcome,
            branch=verdict.branch,
            v_log_P=str(report.v_logP),
            v_log_fP=str(report.v_logP),
            v_S=_opt(report.v_S_alphabeta),
            v_S_p=_opt(report.v_Sp),
            v_combined=str(combined),
            v_LBDP=_opt(report.v_LBDP),
            v_alpha_minus_beta=_opt(report.v_alpha_minus_beta),
            v_euler_factor=_opt(report.v_euler_factor),
            v_log_P_source=verdict.v_logP_source,
            witness=verdict.witness,
            blocked_by=list(verdict.blocked_by),
            ledger=verdict.ledger.summary(),
            a_p=verdict.frobenius.a if verdict.frobenius else None,
            count=verdict.frobenius.count if verdict.frobenius else None,
            local=(
                LocalSummaryPayload(
                    N=verdict.local.N,
                    tam=verdict.local.tam,
                    per_prime=[local.model_dump() for local in verdict.local.per_prime],
                )
                if verdict.local
                else None
            ),
            irreducibility_witness=verdict.irreducibility.l if verdict.irreducibility else None,
            log=verdict.log_certificate.model_dump() if verdict.log_certificate else None,
            baseline_implies=verdict.baseline_implies,
            l_alg_consistent=verdict.l_alg_consistent,
            warnings=list(verdict.warnings),
        )


def _opt(value: Val | None) -> str | None:
    return None if value is None else str(value)


class ScanSummary(BaseModel):
    implied: int = 0
    not_implied: int = 0
    inconclusive: int = 0
    errors: int = 0

    def add(self, line: dict[str, Any]) -> None:
        outcome = line.get("outcome")
        if outcome in ("implied", "not_implied", "inconclusive"):
            setattr(self, outcome, getattr(self, outcome) + 1)
        else:
            self.errors += 1


class ScanResponse(BaseModel):
    results: list[dict[str, Any]]
    summary: ScanSummary
