"""HTTP scoring service.

Stateless per request: candidate log-likelihoods are computed by forced
decoding against the configured backend, with temperature applied to every
step's scores before the log-softmax. The log-softmax here is implemented
locally so the toolkit's own sequence math stays an independent check.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .stub import ModelBackend, StepScores, UnsupportedCandidateError


class ScoreRequest(BaseModel):
    prompt: str
    media_refs: list[str] = Field(default_factory=list)
    candidates: list[str] = Field(min_length=1)
    temperature: float = Field(default=1.0, gt=0)


class BeamsRequest(BaseModel):
    prompt: str
    media_refs: list[str] = Field(default_factory=list)
    k: int = Field(ge=2)


def _sequence_logprob(steps: list[StepScores], temperature: float) -> float:
    total = 0.0
    for step in steps:
        z = np.asarray(step.scores, dtype=float) / temperature
        m = float(z.max())
        total += float(z[step.chosen_index]) - m - math.log(float(np.exp(z - m).sum()))
    return min(total, 0.0)


def create_app(backend: ModelBackend | None) -> FastAPI:
    """Build the service; ``backend=None`` serves 503 on every scoring route."""
    app = FastAPI(title="factnice-adapter", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def schema_violation(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def require_backend() -> ModelBackend | JSONResponse:
        if backend is None:
            return JSONResponse(status_code=503, content={"detail": "model unavailable"})
        return backend

    @app.get("/health")
    async def health():
        if backend is None:
            return JSONResponse(status_code=503, content={"status": "unavailable"})
        return {"status": "ok"}

    @app.post("/score")
    async def score(request: ScoreRequest):
        model = require_backend()
        if isinstance(model, JSONResponse):
            return model
        results = []
        for text in request.candidates:
            try:
                steps = model.score_steps(request.prompt, request.media_refs, text)
            except UnsupportedCandidateError as exc:
                return JSONResponse(
                    status_code=422,
                    content={"detail": f"cannot score candidate {text!r}: {exc}"},
                )
            results.append({"text": text, "logprob": _sequence_logprob(steps, request.temperature)})
        return {"candidates": results}

    @app.post("/beams")
    async def beams(request: BeamsRequest):
        model = require_backend()
        if isinstance(model, JSONResponse):
            return model
        decoded = model.generate_beams(request.prompt, request.media_refs, request.k)
        numeric: list[tuple[str, float]] = []
        filtered = 0
        for text in decoded:
            try:
                numeric.append((text, float(text)))
            except ValueError:
                filtered += 1
        if len(numeric) < 2:
            return JSONResponse(
                status_code=422,
                content={
                    "detail": (
                        f"only {len(numeric)} of {len(decoded)} decoded beams are numeric; "
                        "need at least 2"
                    ),
                    "filtered_non_numeric": filtered,
                },
            )
        results = []
        for text, value in numeric:
            steps = model.score_steps(request.prompt, request.media_refs, text)
            results.append(
                {"text": text, "value": value, "logprob": _sequence_logprob(steps, 1.0)}
            )
        return {"candidates": results, "filtered_non_numeric": filtered}

    return app
