"""Curve analysis service shared by the CLI and the HTTP API."""

from collections.abc import Iterable, Iterator
from concurrent.futures import ProcessPoolExecutor
from itertools import repeat
from typing import Any

import structlog

from .criteria import verdict_K, verdict_Q
from .errors import AnalysisError, InternalConsistencyError, ParseError
from .log import configure_logging
from .models import AnalysisReport, CurveRecord, ScanSummary, parse_record
from .settings import Settings


logger = structlog.get_logger()


class AnalysisService:
    """Service for evaluating curve records against the non-vanishing criteria."""

    def __init__(self, settings: Settings):
        self.settings = settings

    def analyze(self, record: CurveRecord) -> AnalysisReport:
        """Dispatch to the criterion over Q, or over K when the record names a field."""
        logger.info("Analyzing record", label=record.label, p=record.p, ainvs=record.ainvs)
        E = record.curve()
        P = record.curve_point()
        inputs = record.analytic_inputs()
        if record.field is None:
            verdict = verdict_Q(E, record.p, P, inputs, self.settings)
        else:
            verdict = verdict_K(E, record.p, record.field.d, P, inputs, self.settings)
        logger.info(
            "Successfully analyzed record",
            label=record.label,
            outcome=verdict.outcome,
            branch=verdict.branch,
        )
        return AnalysisReport.from_verdict(record, verdict)

    def analyze_line(self, line: str, line_number: int) -> dict[str, Any]:
        """Report for one corpus line; errors become an error record unless strict."""
        try:
            if not line.strip():
                raise ParseError("empty line", line=line_number)
            record = parse_record(line, line_number)
            return {"line": line_number, **self.analyze(record).model_dump(mode="json")}
        except AnalysisError as e:
            if self.settings.strict:
                raise
            logger.warning(
                "Skipping corpus line", line=line_number, error_code=e.code, error=e.message
            )
            return {"line": line_number, **e.to_response().model_dump()}
        except Exception as e:
            if self.settings.strict:
                raise
            logger.error(
                "Unhandled error on corpus line", line=line_number, error=str(e), exc_info=True
            )
            error = InternalConsistencyError(str(e), line=line_number)
            return {"line": line_number, **error.to_response().model_dump()}

    def scan(self, lines: Iterable[str]) -> Iterator[dict[str, Any]]:
        """One result per input line, in input order, fanned out over ``settings.workers``."""
        numbered = [line.rstrip("\n") for line in lines]
        logger.info("Scanning corpus", lines=len(numbered), workers=self.settings.workers)
        if self.settings.workers <= 1 or len(numbered) <= 1:
            for number, line in enumerate(numbered, start=1):
                yield self.analyze_line(line, number)
            return
        with ProcessPoolExecutor(
            max_workers=self.settings.workers,
            initializer=configure_logging,
            initargs=(self.settings.log_level,),
        ) as pool:
            yield from pool.map(
                _scan_worker,
                numbered,
                range(1, len(numbered) + 1),
                repeat(self.settings),
            )

    def scan_all(self, lines: Iterable[str]) -> tuple[list[dict[str, Any]], ScanSummary]:
        results = []
        summary = ScanSummary()
        for result in self.scan(lines):
            summary.add(result)
            results.append(result)
        logger.info("Scan finished", **summary.model_dump())
        return results, summary


def _scan_worker(line: str, line_number: int, settings: Settings) -> dict[str, Any]:
    return AnalysisService(settings).analyze_line(line, line_number)
