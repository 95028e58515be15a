"""HTTP service exposing knowledge bases and sessions.

Knowledge bases are content addressed: registering the same text twice
returns the same kb_id. Sessions live in memory; submissions against one
session are serialized by a per-session lock so step numbers stay gapless
under concurrent clients. Queries never mutate state.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .engine import (
    InvalidFeatureError,
    KnowledgeBase,
    best_question,
    reachability,
    snapshot,
)
from .kb import Severity, parse_kb, validate_kb
from .session import Session, attach_log_dir, new_session, submit_feature


@dataclass
class _SessionHolder:
    session: Session
    kb_id: str
    lock: threading.Lock = field(default_factory=threading.Lock)


def _kb_id_for(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def create_app(kb_dir: str | Path | None = None, log_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="dune service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    kbs: dict[str, KnowledgeBase] = {}
    kb_lock = threading.Lock()
    sessions: dict[str, _SessionHolder] = {}
    sessions_lock = threading.Lock()

    def register_kb_text(text: str) -> tuple[str | None, list]:
        result = parse_kb(text)
        validation = validate_kb(result.kb) if result.kb is not None else []
        diags = list(result.diagnostics) + validation
        if any(d.severity is Severity.ERROR for d in diags):
            return None, diags
        kb_id = _kb_id_for(text)
        with kb_lock:
            kbs[kb_id] = result.kb
        return kb_id, diags

    if kb_dir is not None:
        for path in sorted(Path(kb_dir).glob("*.dune")):
            kb_id, diags = register_kb_text(path.read_text(encoding="utf-8"))
            if kb_id is None:
                # A broken fixture must not take the whole service down.
                print(f"skipping {path}: {len(diags)} diagnostics")

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse({"error": message}, status_code=status)

    def holder_for(session_id: str) -> _SessionHolder | None:
        with sessions_lock:
            return sessions.get(session_id)

    @app.get("/healthz")
    def healthz() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.post("/kb")
    async def register_kb(request: Request) -> JSONResponse:
        body = await request.body()
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError:
            return error(400, "body is not UTF-8")
        kb_id, diags = register_kb_text(text)
        if kb_id is None:
            return JSONResponse(
                {"diagnostics": [d.to_json() for d in diags]}, status_code=422
            )
        warnings = [d.to_json() for d in diags if d.severity is Severity.WARNING]
        return JSONResponse({"kb_id": kb_id, "warnings": warnings})

    @app.post("/sessions")
    async def create_session(request: Request) -> JSONResponse:
        try:
            payload = json.loads(await request.body())
        except json.JSONDecodeError:
            return error(400, "body is not JSON")
        kb_id = payload.get("kb_id") if isinstance(payload, dict) else None
        if not isinstance(kb_id, str):
            return error(400, "missing kb_id")
        with kb_lock:
            kb = kbs.get(kb_id)
        if kb is None:
            return error(404, f"unknown kb_id: {kb_id}")
        session = new_session(kb)
        if log_dir is not None:
            attach_log_dir(session, log_dir)
        with sessions_lock:
            sessions[session.session_id] = _SessionHolder(session=session, kb_id=kb_id)
        return JSONResponse({"session_id": session.session_id}, status_code=201)

    @app.post("/sessions/{session_id}/features")
    async def post_feature(session_id: str, request: Request) -> JSONResponse:
        holder = holder_for(session_id)
        if holder is None:
            return error(404, f"unknown session: {session_id}")
        try:
            payload = json.loads(await request.body())
        except json.JSONDecodeError:
            return error(400, "body is not JSON")
        feature = payload.get("feature") if isinstance(payload, dict) else None
        if not isinstance(feature, str):
            return error(400, "missing feature")
        with holder.lock:
            try:
                report = submit_feature(holder.session, feature)
            except InvalidFeatureError as exc:
                return error(400, str(exc))
        return JSONResponse(report.to_json())

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> JSONResponse:
        holder = holder_for(session_id)
        if holder is None:
            return error(404, f"unknown session: {session_id}")
        with holder.lock:
            session = holder.session
            engine = session.engine
            suggestion = best_question(engine)
            events = []
            for report in session.log:
                for event in report.events:
                    entry = {"fnum": report.fnum}
                    entry.update(event.to_json())
                    events.append(entry)
            view = {
                "session_id": session.session_id,
                "kb_id": holder.kb_id,
                "step": engine.step,
                "rows": [row.to_json() for row in snapshot(engine)],
                "events": events,
                "suggestion": (
                    {
                        "demon": suggestion.demon,
                        "feature": suggestion.feature,
                        "potential": suggestion.potential,
                    }
                    if suggestion is not None
                    else None
                ),
                "reachability": {
                    demon.name: reachability(demon, engine.demon_states[demon.name]).value
                    for demon in engine.kb.demons
                },
                "vocabulary": sorted(engine.vocab),
            }
        return JSONResponse(view)

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str) -> JSONResponse:
        holder = holder_for(session_id)
        if holder is None:
            return error(404, f"unknown session: {session_id}")
        with holder.lock:
            trace = [report.to_json() for report in holder.session.log]
        return JSONResponse(trace)

    @app.get("/sessions/{session_id}/question")
    def get_question(session_id: str) -> JSONResponse:
        holder = holder_for(session_id)
        if holder is None:
            return error(404, f"unknown session: {session_id}")
        with holder.lock:
            suggestion = best_question(holder.session.engine)
        if suggestion is None:
            return JSONResponse({"suggestion": None})
        return JSONResponse(
            {
                "suggestion": {
                    "demon": suggestion.demon,
                    "feature": suggestion.feature,
                    "potential": suggestion.potential,
                }
            }
        )

    return app
