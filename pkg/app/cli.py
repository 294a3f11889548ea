"""Command-line front end: ``ec-unramified analyze|scan|local|ap|log``."""

import json
import sys
from collections.abc import Callable
from functools import wraps
from pathlib import Path
from typing import Any, TextIO

import click
import structlog
from rich.console import Console
from rich.table import Table

from .elliptic import WeierstrassModel, curve_from_ainvs, parse_point, require_on_curve
from .errors import AnalysisError, MixedFields, ParseError
from .formal import certify_log_valuation
from .localdata import count_points, global_summary, tate_local
from .log import configure_logging
from .models import AnalysisReport, ScanSummary, parse_record
from .service import AnalysisService
from .settings import Settings, get_settings


logger = structlog.get_logger()


def _reports_errors(func: Callable[..., None]) -> Callable[..., None]:
    """Print the error envelope on stdout and exit 2 for any AnalysisError."""

    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> None:
        try:
            func(*args, **kwargs)
        except AnalysisError as e:
            logger.error("Command failed", error_code=e.code, error=e.message)
            click.echo(e.to_response().model_dump_json())
            click.get_current_context().exit(2)

    return wrapper


def _analysis_options(func: Callable[..., None]) -> Callable[..., None]:
    options = [
        click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of a table."),
        click.option("--strict", is_flag=True, help="Fail on inconclusive conditions."),
        click.option(
            "--root-choice",
            type=click.Choice(["small", "large"]),
            default=None,
            help="Which square root of -d mod p the embedding lifts.",
        ),
        click.option("--series-order", type=click.IntRange(min=2), default=None),
        click.option("--ell-max", type=click.IntRange(min=5), default=None),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _settings(ctx: click.Context, **overrides: Any) -> Settings:
    settings: Settings = ctx.obj
    if overrides.get("strict") is False:
        overrides["strict"] = None
    return settings.with_overrides(**overrides)


def _read_source(source: str) -> str:
    if source == "-":
        return click.get_text_stream("stdin").read()
    if source.startswith("@"):
        try:
            return Path(source[1:]).read_text()
        except OSError as e:
            raise ParseError(f"cannot read {source[1:]}: {e.strerror}")
    return source


def _parse_ainvs(text: str) -> WeierstrassModel:
    try:
        return curve_from_ainvs(json.loads(text))
    except (json.JSONDecodeError, ValueError, TypeError) as e:
        raise ParseError(f"invalid a-invariants {text!r}: {e}", field="ainvs")


def _parse_point_arg(text: str) -> Any:
    try:
        return parse_point(json.loads(text) if text != "O" else "O")
    except (json.JSONDecodeError, ValueError, TypeError) as e:
        raise ParseError(f"invalid point {text!r}: {e}", field="point")


def render_report(report: AnalysisReport, console: Console) -> None:
    """Rich rendering of one analysis: the verdict, the valuations and the condition ledger."""
    title = report.label or str(report.ainvs)
    over = "Q" if report.d is None else f"Q(sqrt(-{report.d}))"
    console.print(f"[bold]{title}[/bold] at p = {report.p} over {over}: {report.outcome}")

    valuations = Table(title="Valuations")
    valuations.add_column("quantity")
    valuations.add_column("value", justify="right")
    for name in ("v_log_P", "v_S", "v_S_p", "v_combined", "v_LBDP", "v_alpha_minus_beta"):
        value = getattr(report, name)
        if value is not None:
            valuations.add_row(name, value)
    console.print(valuations)

    ledger = Table(title=f"Conditions ({report.theorem})")
    ledger.add_column("condition")
    ledger.add_column("status")
    ledger.add_column("witness")
    for key, entry in report.ledger.items():
        ledger.add_row(key, entry["status"], entry["witness"])
    console.print(ledger)

    if report.witness:
        console.print(f"branch {report.branch}: {report.witness}")
    if report.blocked_by:
        console.print(f"blocked by: {', '.join(report.blocked_by)}")
    for warning in report.warnings:
        console.print(f"[yellow]warning:[/yellow] {warning}")


@click.group()
@click.option("--log-level", default=None, help="Log level for the stderr JSON log stream.")
@click.pass_context
def main(ctx: click.Context, log_level: str | None) -> None:
    """Certify non-vanishing of E[p]-parts of class groups from p-adic valuations."""
    settings = get_settings().with_overrides(log_level=log_level)
    configure_logging(settings.log_level)
    ctx.obj = settings


@main.command()
@click.argument("record")
@_analysis_options
@click.pass_context
@_reports_errors
def analyze(
    ctx: click.Context,
    record: str,
    as_json: bool,
    strict: bool,
    root_choice: str | None,
    series_order: int | None,
    ell_max: int | None,
) -> None:
    """Analyze one RECORD (inline JSON, @file, or - for stdin)."""
    settings = _settings(
        ctx, strict=strict, root_choice=root_choice, series_order=series_order, ell_max=ell_max
    )
    parsed = parse_record(_read_source(record).strip(), line_number=1)
    report = AnalysisService(settings).analyze(parsed)
    if as_json:
        click.echo(report.model_dump_json())
    else:
        render_report(report, Console())


@main.command()
@click.argument("corpus", type=click.File("r"), default="-")
@_analysis_options
@click.option("--workers", type=click.IntRange(min=1), default=None)
@click.pass_context
@_reports_errors
def scan(
    ctx: click.Context,
    corpus: TextIO,
    as_json: bool,
    strict: bool,
    root_choice: str | None,
    series_order: int | None,
    ell_max: int | None,
    workers: int | None,
) -> None:
    """Analyze every line of a JSONL CORPUS; results on stdout, summary on stderr."""
    settings = _settings(
        ctx,
        strict=strict,
        root_choice=root_choice,
        series_order=series_order,
        ell_max=ell_max,
        workers=workers,
    )
    service = AnalysisService(settings)
    summary = ScanSummary()
    for result in service.scan(corpus):
        summary.add(result)
        click.echo(json.dumps(result))
    counts = summary.model_dump()

    table = Table(title="Scan summary")
    for key in counts:
        table.add_column(key, justify="right")
    table.add_row(*(str(value) for value in counts.values()))
    Console(file=sys.stderr).print(table)
    if as_json:
        click.echo(json.dumps({"summary": counts}), err=True)


@main.command()
@click.option("--ainvs", required=True, help="[a1,a2,a3,a4,a6] as JSON.")
@click.option("--prime", "l", type=int, default=None, help="Only this prime.")
@_reports_errors
def local(ainvs: str, l: int | None) -> None:
    """Kodaira type, Tamagawa number and conductor exponent."""
    E = _parse_ainvs(ainvs)
    if l is not None:
        click.echo(tate_local(E, l).model_dump_json())
    else:
        click.echo(global_summary(E).model_dump_json())


@main.command()
@click.option("--ainvs", required=True, help="[a1,a2,a3,a4,a6] as JSON.")
@click.option("--prime", "l", type=int, required=True)
@_reports_errors
def ap(ainvs: str, l: int) -> None:
    """#E~(F_l) and a_l."""
    click.echo(count_points(_parse_ainvs(ainvs), l).model_dump_json())


@main.command(name="log")
@click.option("--ainvs", required=True, help="[a1,a2,a3,a4,a6] as JSON.")
@click.option("--prime", "p", type=int, required=True)
@click.option("--point", required=True, help='"O", ["x","y"] or a pair of {"u","v","d"} objects.')
@click.option("--d", "d", type=int, default=None, help="Expected field Q(sqrt(-d)) of the point.")
@click.option("--root-choice", type=click.Choice(["small", "large"]), default=None)
@click.option("--series-order", type=click.IntRange(min=2), default=None)
@click.pass_context
@_reports_errors
def log_command(
    ctx: click.Context,
    ainvs: str,
    p: int,
    point: str,
    d: int | None,
    root_choice: str | None,
    series_order: int | None,
) -> None:
    """Certified v_p(log_w(Q)) for a point Q."""
    settings = _settings(ctx, root_choice=root_choice, series_order=series_order)
    E = _parse_ainvs(ainvs)
    Q = _parse_point_arg(point)
    if Q.field is not None and d is not None and Q.field != d:
        raise MixedFields(f"point lies over Q(sqrt(-{Q.field})), not d = {d}", d=d)
    require_on_curve(E, Q)
    certificate = certify_log_valuation(
        E,
        p,
        Q,
        order=settings.series_order,
        cap=settings.series_cap,
        margin=settings.padic_margin,
        root_choice=settings.root_choice,
    )
    click.echo(certificate.model_dump_json())


if __name__ == "__main__":
    main()
