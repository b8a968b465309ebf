"""HTTP service for live adaptive assessments.

Wraps one loaded bundle behind a small JSON API: create a session, submit
word responses, read snapshots.  Sessions live in memory, expire after a
configurable idle time, and can be mirrored to append-only transcript files.
Every error body is {"code": ..., "message": ...} with stable code strings.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from pathlib import Path
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .bundle import bundle_to_pipeline, load_bundle
from .errors import AdaptestError, SessionNotFound
from .pipeline import FittedPipeline
from .sessions import AssessmentSession

STATUS_BY_CODE = {
    "unknown_strategy": 400,
    "bundle_not_loaded": 503,
    "session_not_found": 404,
    "wrong_item": 409,
    "session_finished": 409,
    "item_already_administered": 409,
    "all_words_oov": 422,
    "empty_session": 409,
    "no_items_remaining": 409,
}


class CreateSessionRequest(BaseModel):
    strategy: str
    scoring: str = "both"
    max_items: int | None = Field(default=None, ge=1)


class SubmitResponseRequest(BaseModel):
    item_id: int
    words: list[str]


class _Registry:
    """Session store with idle expiry; a global lock guards the table and a
    per-session lock serializes that session's requests."""

    def __init__(self, ttl: float, clock: Callable[[], float]):
        self.ttl = ttl
        self.clock = clock
        self._lock = threading.Lock()
        self._sessions: dict[str, tuple[AssessmentSession, threading.Lock]] = {}
        self._last_active: dict[str, float] = {}

    def _purge(self, now: float) -> None:
        expired = [
            sid for sid, t in self._last_active.items() if now - t > self.ttl
        ]
        for sid in expired:
            del self._sessions[sid]
            del self._last_active[sid]

    def add(self, session: AssessmentSession) -> None:
        now = self.clock()
        with self._lock:
            self._purge(now)
            self._sessions[session.session_id] = (session, threading.Lock())
            self._last_active[session.session_id] = now

    def get(self, session_id: str) -> tuple[AssessmentSession, threading.Lock]:
        now = self.clock()
        with self._lock:
            self._purge(now)
            if session_id not in self._sessions:
                raise SessionNotFound(f"no active session {session_id!r}")
            self._last_active[session_id] = now
            return self._sessions[session_id]

    def count(self) -> int:
        with self._lock:
            self._purge(self.clock())
            return len(self._sessions)


def _question_payload(session: AssessmentSession) -> dict | None:
    question = session.question()
    if question is None:
        return None
    return {
        "item_id": question.item_id,
        "text": question.question_text,
        "min_words": question.min_words,
    }


def create_app(
    pipeline: FittedPipeline,
    config: dict | None = None,
    *,
    session_ttl: float = 3600.0,
    transcript_dir: str | Path | None = None,
    clock: Callable[[], float] = time.monotonic,
) -> FastAPI:
    """Build the API around one fitted pipeline.

    ``config`` carries the bundle's measure name, default max_items, and
    score-exposure flag; ``transcript_dir`` turns on per-session jsonl
    transcripts; ``clock`` is injectable for expiry tests."""
    config = dict(config or {})
    default_max_items = int(config.get("max_items", 5))
    app = FastAPI(title="adaptest", docs_url=None, redoc_url=None)
    # the browser client is served as static files from another origin; the
    # API is an unauthenticated research artifact, so any origin may call it
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    registry = _Registry(session_ttl, clock)
    transcript_root = Path(transcript_dir) if transcript_dir else None
    if transcript_root:
        transcript_root.mkdir(parents=True, exist_ok=True)

    def append_events(session: AssessmentSession, events: list[dict]) -> None:
        if transcript_root is None:
            return
        with open(transcript_root / f"{session.session_id}.jsonl", "a") as fh:
            for event in events:
                fh.write(json.dumps(event, sort_keys=True) + "\n")

    @app.exception_handler(AdaptestError)
    async def on_domain_error(request: Request, exc: AdaptestError):
        return JSONResponse(
            status_code=STATUS_BY_CODE.get(exc.code, 400),
            content={"code": exc.code, "message": str(exc)},
        )

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"code": "invalid_request", "message": str(exc.errors())},
        )

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionRequest):
        session = AssessmentSession(
            pipeline,
            strategy=body.strategy,
            scoring=body.scoring,
            max_items=body.max_items or default_max_items,
            session_id=uuid.uuid4().hex,
        )
        registry.add(session)
        append_events(session, session.events)
        return {
            "session_id": session.session_id,
            "question": _question_payload(session),
        }

    @app.post("/api/sessions/{session_id}/responses")
    def submit_response(session_id: str, body: SubmitResponseRequest):
        session, lock = registry.get(session_id)
        with lock:
            before = len(session.events)
            result = session.submit(body.item_id, body.words)
            append_events(session, session.events[before:])
        return {
            "step": result.step,
            "estimates": session.estimates(),
            "question": _question_payload(session),
            "done": result.done,
        }

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        session, lock = registry.get(session_id)
        with lock:
            return session.snapshot()

    @app.get("/api/items")
    def get_items():
        return {
            "items": [
                {
                    "item_id": item.item_id,
                    "text": item.question_text,
                    "shorthand": item.shorthand,
                    "min_words": item.min_words,
                }
                for item in pipeline.items
            ]
        }

    @app.get("/api/health")
    def health():
        return {
            "status": "ok",
            "bundle": {
                "measure": config.get("measure"),
                "K": pipeline.K,
                "J": len(pipeline.items),
                "seed": pipeline.seed,
                "strategies": list(pipeline.available_strategies),
                "scorings": ["latent", "ctt", "both"],
                "max_items_default": default_max_items,
                "score_exposure": config.get("score_exposure", "trajectory"),
                "theta0": pipeline.theta0,
            },
            "active_sessions": registry.count(),
        }

    return app


def create_app_from_bundle(
    bundle_path: str | Path,
    *,
    session_ttl: float = 3600.0,
    transcript_dir: str | Path | None = None,
) -> FastAPI:
    pipeline, config = bundle_to_pipeline(load_bundle(bundle_path))
    return create_app(
        pipeline, config, session_ttl=session_ttl, transcript_dir=transcript_dir
    )
