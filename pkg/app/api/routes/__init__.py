from fastapi import HTTPException

from app.core.errors import USAGE_ERRORS, ExperimentError, TransductionCounterexample, WordProblemError


def to_http_error(e: WordProblemError) -> HTTPException:
    """400 for bad input, 422 for a failed check, 500 for anything else (budgets included)."""
    if isinstance(e, USAGE_ERRORS):
        return HTTPException(status_code=400, detail=str(e))
    if isinstance(e, ExperimentError):
        return HTTPException(status_code=422, detail={"error": str(e), "diff": e.diff})
    if isinstance(e, TransductionCounterexample):
        return HTTPException(status_code=422, detail={"error": str(e), "witness": [e.first, e.second]})
    return HTTPException(status_code=500, detail=str(e))
