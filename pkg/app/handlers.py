"""Exception handlers for the FastAPI application."""

import structlog
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from .errors import (
    AnalysisError,
    ConditionFailed,
    ErrorResponse,
    InconclusiveCondition,
    InternalConsistencyError,
)


logger = structlog.get_logger()


def status_for(exc: AnalysisError) -> int:
    """409 when the input is valid but a theorem condition fails, 500 for internal faults."""
    if isinstance(exc, ConditionFailed | InconclusiveCondition):
        return 409
    if isinstance(exc, InternalConsistencyError):
        return 500
    return 422


async def analysis_exception_handler(request: Request, exc: AnalysisError) -> JSONResponse:
    """Handle analysis errors with their machine-readable code."""
    logger.error("Analysis error", error_code=exc.code, error=exc.message)
    return JSONResponse(status_code=status_for(exc), content=exc.to_response().model_dump())


async def validation_exception_handler(request: Request, exc: ValidationError) -> JSONResponse:
    """Handle Pydantic validation errors with the offending field paths."""
    logger.error("Validation error", error=str(exc))
    field_violations = [
        {"field": ".".join(str(loc) for loc in error["loc"]), "description": error["msg"]}
        for error in exc.errors()
    ]
    return JSONResponse(
        status_code=422,
        content=ErrorResponse(
            message="Validation error in curve record",
            error_code="VALIDATION_ERROR",
            details={"field_violations": field_violations},
        ).model_dump(),
    )


async def unicode_decode_exception_handler(
    request: Request, exc: UnicodeDecodeError
) -> JSONResponse:
    """Handle request bodies that are not UTF-8."""
    logger.error("Unicode decode error", error=str(exc))
    return JSONResponse(
        status_code=422,
        content=ErrorResponse(
            message=f"Request body is not UTF-8: {exc!s}", error_code="PARSE_ERROR"
        ).model_dump(),
    )


async def global_exception_handler(request: Request, exc: Exception) -> JSONResponse:
    """Handle all unhandled exceptions."""
    logger.error("Unhandled exception", error=str(exc), exc_info=True)
    return JSONResponse(
        status_code=500,
        content=ErrorResponse(
            success=False, message="Internal server error", error_code="INTERNAL_ERROR"
        ).model_dump(),
    )


def register_exception_handlers(app: FastAPI) -> None:
    """Register all exception handlers with the FastAPI app."""
    app.exception_handler(AnalysisError)(analysis_exception_handler)
    app.exception_handler(ValidationError)(validation_exception_handler)
    app.exception_handler(UnicodeDecodeError)(unicode_decode_exception_handler)
    app.exception_handler(Exception)(global_exception_handler)
