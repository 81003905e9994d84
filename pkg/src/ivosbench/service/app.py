"""HTTP routes of the benchmark service."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..dataset import DatasetError
from .handlers import handle_run, handle_score, handle_synth
from .models import (
    HealthResponse,
    ReportModel,
    RunRequest,
    ScoreRequest,
    ScoreResponse,
    SynthRequest,
    SynthResponse,
)

app = FastAPI(
    title="ivosbench",
    version=__version__,
    description=(
        "Round-based benchmark service for click-driven interactive video "
        "object segmentation. Paths in requests refer to the server's filesystem."
    ),
)

_CLIENT_ERRORS = (DatasetError, FileNotFoundError, NotADirectoryError, ValueError, KeyError)


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/evaluate", response_model=ReportModel)
def evaluate(request: RunRequest) -> ReportModel:
    try:
        return ReportModel.model_validate(handle_run(request))
    except _CLIENT_ERRORS as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.post("/synthesize", response_model=SynthResponse)
def synthesize(request: SynthRequest) -> SynthResponse:
    try:
        return handle_synth(request)
    except _CLIENT_ERRORS as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.post("/score", response_model=ScoreResponse)
def score(request: ScoreRequest) -> ScoreResponse:
    try:
        return handle_score(request)
    except _CLIENT_ERRORS as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
