"""
FastAPI application exposing the curve analysis over HTTP.

- POST /v1/analyze takes one curve record (JSON) and returns the verdict report
- POST /v1/scan takes a JSONL corpus and returns one result per line plus a summary
- Errors use the same envelope and machine codes as the command line
"""

from collections.abc import AsyncIterator
from contextlib import asynccontextmanager

import structlog
from fastapi import FastAPI, Request
from starlette.concurrency import run_in_threadpool

from . import __version__
from .handlers import register_exception_handlers
from .log import configure_logging
from .models import ScanResponse, parse_record
from .service import AnalysisService
from .settings import Settings, get_settings


logger = structlog.get_logger()


@asynccontextmanager
async def lifespan(app: FastAPI) -> AsyncIterator[None]:
    """Application lifespan manager."""
    logger.info("Starting unramified-points API", workers=app.state.settings.workers)
    yield
    logger.info("Shutting down unramified-points API")


def create_app(settings: Settings | None = None) -> FastAPI:
    """Build the API around one Settings instance; tests pass their own."""
    settings = settings or get_settings()
    configure_logging(settings.log_level)

    app = FastAPI(
        title="Unramified points API",
        description="Non-vanishing verdicts for E[p]-parts of class groups",
        version=__version__,
        lifespan=lifespan,
    )
    app.state.settings = settings

    register_exception_handlers(app)

    @app.get("/health")
    async def health_check() -> dict[str, str]:
        """Return basic health status."""
        return {"status": "healthy", "service": "unramified-points"}

    @app.post("/v1/analyze")
    async def analyze(request: Request) -> dict:
        """Analyze one curve record."""
        body = (await request.body()).decode("utf-8")
        record = parse_record(body, line_number=1)
        service = AnalysisService(request.app.state.settings)
        report = await run_in_threadpool(service.analyze, record)
        return report.model_dump(mode="json")

    @app.post("/v1/scan")
    async def scan(request: Request) -> dict:
        """Analyze a JSONL corpus, one result per input line."""
        body = (await request.body()).decode("utf-8")
        lines = body.splitlines()
        service = AnalysisService(request.app.state.settings)
        results, summary = await run_in_threadpool(service.scan_all, lines)
        return ScanResponse(results=results, summary=summary).model_dump()

    return app


app = create_app()


if __name__ == "__main__":
    import uvicorn

    uvicorn.run("app.main:app", host="0.0.0.0", port=8000, reload=True, log_level="info")
