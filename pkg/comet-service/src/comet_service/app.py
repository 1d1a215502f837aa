"""FastAPI application for the scoring service."""

from __future__ import annotations

import threading
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, field_validator

from .models import load_model


class ScoreItem(BaseModel):
    src: str
    mt: str = Field(min_length=1)
    ref: str = Field(min_length=1)


class ScoreBatchRequest(BaseModel):
    items: list[ScoreItem] = Field(min_length=1)

    @field_validator("items")
    @classmethod
    def no_blank_fields(cls, items):
        for i, item in enumerate(items):
            if not item.mt.strip() or not item.ref.strip():
                raise ValueError(f"item {i} has a blank mt/ref field")
        return items


class ScoreBatchResponse(BaseModel):
    scores: list[float]


def create_app(loader=load_model) -> FastAPI:
    """`loader` is called once at startup and must return an object with
    .name and .predict(items) -> list[float]; injectable for tests."""

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.model = loader()
        yield

    app = FastAPI(title="comet-service", lifespan=lifespan)
    app.state.items_scored = 0
    app.state.counter_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def schema_violation(request: Request, exc: RequestValidationError):
        detail = [
            {"loc": [str(part) for part in err["loc"]], "msg": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.get("/health")
    async def health():
        model = getattr(app.state, "model", None)
        if model is None:
            return {"status": "loading"}
        return {"status": "ok", "model": model.name}

    @app.post("/score", response_model=ScoreBatchResponse)
    async def score(request: ScoreBatchRequest):
        model = getattr(app.state, "model", None)
        if model is None:
            return JSONResponse(status_code=503, content={"detail": "model loading"})
        items = [item.model_dump() for item in request.items]
        with app.state.counter_lock:
            app.state.items_scored += len(items)
        raw = model.predict(items)
        clamped = 0
        scores = []
        for value in raw:
            if value < 0.0 or value > 1.0:
                clamped += 1
                value = min(1.0, max(0.0, value))
            scores.append(value)
        headers = {"X-Clamped-Count": str(clamped)}
        return JSONResponse(content={"scores": scores}, headers=headers)

    return app
