"""HTTP+JSON session API over a loaded corpus.

Endpoints:
    GET  /bugs
    POST /sessions                  {bug_id}
    GET  /sessions/{id}
    POST /sessions/{id}/explore     {cluster_id}
    POST /sessions/{id}/exclude     {cluster_id}
    GET  /sessions/{id}/tables?patches=p1,p2
    POST /sessions/{id}/select      {patch_id}

Errors return {code, message} with a matching HTTP status.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..bench import load_corpus
from ..pipeline import PipelineError
from ..patchmodel import PatchParseError
from . import sessions as ss
from .schemas import (
    BugListResponse, BugSummary, CreateSessionRequest, ExcludeRequest,
    ExploreRequest, SelectRequest, SelectResponse, SessionView, TablesResponse,
)

_ERROR_STATUS = {
    "UnknownBug": 404,
    "UnknownSession": 404,
    "UnknownCluster": 404,
    "UnknownPatch": 404,
    "EmptyActiveSet": 409,
    "PipelineError": 500,
    "PatchParseError": 422,
}


def create_app(corpus_dir: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    store = ss.SessionStore(load_corpus(Path(corpus_dir)))
    app = FastAPI(title="patchlens", version="0.1.0")
    app.state.store = store

    @app.exception_handler(Exception)
    async def domain_error(request: Request, exc: Exception):
        code = type(exc).__name__
        if code not in _ERROR_STATUS:
            raise exc
        return JSONResponse(
            status_code=_ERROR_STATUS[code],
            content={"code": code, "message": str(exc)},
        )

    for name in (ss.UnknownBug, ss.UnknownSession, ss.UnknownCluster,
                 ss.UnknownPatch, ss.EmptyActiveSet, PipelineError, PatchParseError):
        app.add_exception_handler(name, domain_error)

    @app.get("/bugs", response_model=BugListResponse)
    def list_bugs():
        bugs = [
            BugSummary(
                bug_id=b.id,
                root_cause=b.root_cause,
                buggy_line=b.buggy_line,
                buggy_statement=b.buggy_context().buggy_statement_text.strip(),
                patch_count=len(b.patches),
            )
            for b in store.bug_list()
        ]
        return BugListResponse(bugs=bugs)

    @app.post("/sessions", response_model=SessionView)
    def create_session(body: CreateSessionRequest):
        session = store.create(body.bug_id)
        return store.view_payload(session)

    @app.get("/sessions/{session_id}", response_model=SessionView)
    def get_session(session_id: str):
        return store.view_payload(store.get(session_id))

    @app.post("/sessions/{session_id}/explore", response_model=SessionView)
    def explore(session_id: str, body: ExploreRequest):
        session = store.explore(store.get(session_id), body.cluster_id)
        return store.view_payload(session)

    @app.post("/sessions/{session_id}/exclude", response_model=SessionView)
    def exclude(session_id: str, body: ExcludeRequest):
        session = store.exclude(store.get(session_id), body.cluster_id)
        return store.view_payload(session)

    @app.get("/sessions/{session_id}/tables", response_model=TablesResponse)
    def tables(session_id: str, patches: str = Query("")):
        ids = [p for p in patches.split(",") if p]
        session = store.get(session_id)
        return TablesResponse(
            session_id=session_id,
            tables=store.tables_for(session, ids),
        )

    @app.post("/sessions/{session_id}/select", response_model=SelectResponse)
    def select(session_id: str, body: SelectRequest):
        return store.select(store.get(session_id), body.patch_id)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
