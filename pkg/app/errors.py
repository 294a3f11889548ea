"""Error hierarchy shared by the library, the CLI and the HTTP surface."""

from typing import Any, ClassVar

from pydantic import BaseModel, Field


class ErrorResponse(BaseModel):
    """Error envelope returned by the CLI and the HTTP surface."""

    success: bool = False
    message: str
    error_code: str
    details: dict[str, Any] = Field(default_factory=dict)


class AnalysisError(Exception):
    """Base class for every error the analysis pipeline raises on purpose."""

    code: ClassVar[str] = "ANALYSIS_ERROR"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_response(self) -> ErrorResponse:
        """Render the error envelope used by the CLI and the HTTP handlers."""
        return ErrorResponse(
            message=self.message,
            error_code=self.code,
            details={key: _jsonable(value) for key, value in self.details.items()},
        )

    def __reduce__(self) -> tuple[Any, ...]:
        # Subclasses take extra constructor arguments; rebuild from state when pickled.
        return (_restore, (type(self), self.__dict__))


def _restore(cls: type["AnalysisError"], state: dict[str, Any]) -> "AnalysisError":
    error = cls.__new__(cls)
    Exception.__init__(error, state["message"])
    error.__dict__.update(state)
    return error


def _jsonable(value: Any) -> Any:
    if isinstance(value, str | int | bool | float) or value is None:
        return value
    if isinstance(value, list | tuple):
        return [_jsonable(item) for item in value]
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    return str(value)


class InvalidPrime(AnalysisError):
    code = "INVALID_PRIME"


class NonResidue(AnalysisError):
    code = "NON_RESIDUE"


class NotSquareFree(AnalysisError):
    code = "NOT_SQUARE_FREE"


class SingularCurve(AnalysisError):
    code = "SINGULAR_CURVE"


class MixedFields(AnalysisError):
    code = "MIXED_FIELDS"


class NotOnCurve(AnalysisError):
    code = "NOT_ON_CURVE"


class BadReduction(AnalysisError):
    code = "BAD_REDUCTION"


class NonMinimal(AnalysisError):
    code = "NON_MINIMAL"


class InertPrime(AnalysisError):
    """The prime does not split in the quadratic field, so K has no embedding into Q_p."""

    code = "INERT_PRIME"


class PrecisionExhausted(AnalysisError):
    code = "PRECISION_EXHAUSTED"


class HasseViolation(AnalysisError):
    code = "HASSE_VIOLATION"


class ConditionFailed(AnalysisError):
    """A verifiable theorem condition evaluated to false."""

    code = "CONDITION_FAILED"

    def __init__(self, which: str, message: str, **details: Any):
        super().__init__(message, which=which, **details)
        self.which = which

    def to_response(self) -> ErrorResponse:
        response = super().to_response()
        return response.model_copy(update={"error_code": condition_error_code(self.which)})


class InconclusiveCondition(AnalysisError):
    code = "INCONCLUSIVE_CONDITION"

    def __init__(self, which: list[str], message: str, **details: Any):
        super().__init__(message, which=which, **details)
        self.which = which


class ParseError(AnalysisError):
    code = "PARSE_ERROR"

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        super().__init__(message, line=line, field=field)
        self.line = line
        self.field = field


class InternalConsistencyError(AnalysisError):
    code = "INTERNAL_ERROR"


def condition_error_code(which: str) -> str:
    """Machine code for a failed condition key: ``heegner_c`` -> ``HEEGNER_C_FAILED``."""
    key = which.upper()
    if key.isdigit():
        key = f"CONDITION_{key}"
    return f"{key}_FAILED"
