"""HTTP facade over the library.

Everything reasoning-related stays in the library modules; this layer only
parses payloads, keeps loaded bases in memory, and shapes results as JSON.
Sessions are created by POSTing a base's text form and then addressed by
id, so repeated requests against the same base reuse its caches.

Error mapping is uniform: text that fails to parse is 400, semantically
invalid requests (unknown constants, contract violations, bad units) are
422, anything hitting a resource cap is 413, and unknown session or job
ids are 404.  Every error body has the same shape::

    {"error": {"code": "...", "message": "...", "detail": ...}}

Long builds can run asynchronously: pass ``"mode": "async"`` to the graph
endpoint and poll the returned job id.
"""

from __future__ import annotations

import itertools
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .charact import (
    DEFAULT_PRODUCT_CAP,
    build_can,
    build_core,
    characterizes,
    explains,
)
from .errors import (
    CapacityError,
    InvariantError,
    NexusError,
    ParseError,
    SemanticError,
)
from .expansion import (
    DEFAULT_TUPLE_CAP,
    build_expansion_graph,
    compare,
    ess,
    export_graph,
    in_ess,
)
from .formula import parse_formula, render_formula
from .kb import (
    SelectiveKB,
    Unit,
    make_selector,
    parse_kb,
    parse_summaries,
    parse_unit,
    render_tuple,
)

DEFAULT_PORT = 7878

_STATUS = {
    "parse-error": 400,
    "semantic-error": 422,
    "capacity-error": 413,
    "not-found": 404,
}


class ServiceError(Exception):
    """Carries a ready-to-serialize error body and its status code."""

    def __init__(self, code: str, message: str, detail=None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.detail = detail

    @property
    def status(self) -> int:
        return _STATUS.get(self.code, 500)

    def body(self) -> dict:
        return {"error": {"code": self.code, "message": self.message,
                          "detail": self.detail}}


def _classify(err: NexusError) -> ServiceError:
    if isinstance(err, ParseError):
        detail = None
        if err.line is not None:
            detail = {"line": err.line, "column": err.column}
        return ServiceError("parse-error", str(err), detail)
    if isinstance(err, CapacityError):
        return ServiceError("capacity-error", str(err))
    if isinstance(err, InvariantError):
        # A broken library postcondition is our bug, not the caller's.
        return ServiceError("internal", str(err))
    return ServiceError("semantic-error", str(err))


class SessionRequest(BaseModel):
    facts: str
    rules: str = ""
    selector: str = "neighborhood"
    summaries: Optional[str] = None


class UnitRequest(BaseModel):
    unit: str


class EssRequest(BaseModel):
    unit: str
    tuple: Optional[str] = None


class ExplainsRequest(BaseModel):
    unit: str
    formula: str


class CompareRequest(BaseModel):
    unit: str
    tau: str
    tau_prime: str


class GraphRequest(BaseModel):
    unit: str
    tuple_cap: Optional[int] = Field(default=None, ge=1)
    partial: bool = False
    mode: str = "sync"


class _Session:
    def __init__(self, session_id: str, skb: SelectiveKB):
        self.session_id = session_id
        self.skb = skb
        self.jobs: dict[str, dict] = {}


class _State:
    def __init__(self, tuple_cap: int, product_cap: int):
        self.tuple_cap = tuple_cap
        self.product_cap = product_cap
        self.sessions: dict[str, _Session] = {}
        self.lock = threading.Lock()
        self.counter = itertools.count(1)
        self.pool = ThreadPoolExecutor(max_workers=2)

    def add(self, skb: SelectiveKB) -> _Session:
        with self.lock:
            session = _Session(f"s{next(self.counter)}", skb)
            self.sessions[session.session_id] = session
            return session

    def get(self, session_id: str) -> _Session:
        with self.lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise ServiceError("not-found", f"no session {session_id!r}")
        return session


def _parse_unit_arg(text: str, session: _Session) -> Unit:
    unit = parse_unit(text)
    for tup in unit.sorted_tuples:
        session.skb.summary(tup)  # validates constants against the base
    return unit


def _parse_tuple_arg(text: str, arity_hint: Optional[int] = None):
    unit = parse_unit(text)
    if len(unit) != 1:
        raise SemanticError(f"expected a single tuple, got {len(unit)}")
    (tup,) = unit.sorted_tuples
    if arity_hint is not None and len(tup) != arity_hint:
        raise SemanticError(
            f"tuple {render_tuple(tup)} has length {len(tup)}, expected {arity_hint}"
        )
    return tup


def create_app(
    tuple_cap: Optional[int] = None,
    product_cap: Optional[int] = None,
) -> FastAPI:
    """Build the application; caps fall back to environment, then defaults."""
    if tuple_cap is None:
        tuple_cap = int(os.environ.get("NEXUS_CAP_TUPLES", DEFAULT_TUPLE_CAP))
    if product_cap is None:
        product_cap = int(os.environ.get("NEXUS_CAP_PRODUCT", DEFAULT_PRODUCT_CAP))
    state = _State(tuple_cap, product_cap)
    app = FastAPI(title="nexus", version=__version__)
    app.state.nexus = state
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ServiceError)
    async def _service_error(_req: Request, err: ServiceError):
        return JSONResponse(status_code=err.status, content=err.body())

    @app.exception_handler(NexusError)
    async def _nexus_error(_req: Request, err: NexusError):
        wrapped = _classify(err)
        return JSONResponse(status_code=wrapped.status, content=wrapped.body())

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, err: RequestValidationError):
        wrapped = ServiceError("invalid-request", "request body is invalid",
                               err.errors())
        return JSONResponse(status_code=422, content=wrapped.body())

    @app.get("/")
    async def root():
        return {"name": "nexus", "version": __version__}

    @app.post("/sessions", status_code=201)
    def create_session(req: SessionRequest):
        text = req.facts
        if req.rules.strip():
            text = f"{text}\n{req.rules}"
        kb = parse_kb(text)
        table = parse_summaries(req.summaries) if req.summaries else None
        selector = make_selector(req.selector, table=table)
        skb = SelectiveKB(kb, selector)
        session = state.add(skb)
        return {"session_id": session.session_id, "stats": kb.stats()}

    @app.get("/sessions/{session_id}")
    def session_stats(session_id: str):
        session = state.get(session_id)
        return {"session_id": session_id, "stats": session.skb.kb.stats()}

    @app.post("/sessions/{session_id}/can")
    def can(session_id: str, req: UnitRequest):
        session = state.get(session_id)
        unit = _parse_unit_arg(req.unit, session)
        f = build_can(unit, session.skb, product_cap=state.product_cap)
        return {"formula": render_formula(f), "atom_count": len(f.body)}

    @app.post("/sessions/{session_id}/core")
    def core(session_id: str, req: UnitRequest):
        session = state.get(session_id)
        unit = _parse_unit_arg(req.unit, session)
        f = build_core(unit, session.skb, product_cap=state.product_cap)
        return {"formula": render_formula(f), "atom_count": len(f.body)}

    @app.post("/sessions/{session_id}/ess")
    def ess_route(session_id: str, req: EssRequest):
        session = state.get(session_id)
        unit = _parse_unit_arg(req.unit, session)
        if req.tuple is not None:
            tup = _parse_tuple_arg(req.tuple, unit.arity)
            return {"member": in_ess(tup, unit, session.skb)}
        members = ess(unit, session.skb)
        return {
            "tuples": sorted(
                [[t.name for t in tup] for tup in members]
            )
        }

    @app.post("/sessions/{session_id}/explains")
    def explains_route(session_id: str, req: ExplainsRequest):
        session = state.get(session_id)
        unit = _parse_unit_arg(req.unit, session)
        f = parse_formula(req.formula)
        does = explains(f, unit, session.skb)
        chars = does and characterizes(f, unit, session.skb)
        return {"explains": does, "characterizes": chars}

    @app.post("/sessions/{session_id}/compare")
    def compare_route(session_id: str, req: CompareRequest):
        session = state.get(session_id)
        unit = _parse_unit_arg(req.unit, session)
        tau = _parse_tuple_arg(req.tau, unit.arity)
        tau_prime = _parse_tuple_arg(req.tau_prime, unit.arity)
        result = compare(tau, tau_prime, unit, session.skb)
        return {
            "relation": result.relation.value,
            "witness": {
                "tau_in_ess_prime": result.tau_in_ess_prime,
                "tau_prime_in_ess": result.tau_prime_in_ess,
            },
        }

    def _graph_payload(session: _Session, req: GraphRequest) -> dict:
        unit = _parse_unit_arg(req.unit, session)
        cap = req.tuple_cap if req.tuple_cap is not None else state.tuple_cap
        graph = build_expansion_graph(
            unit, session.skb, tuple_cap=cap, partial=req.partial
        )
        return export_graph(graph)

    @app.post("/sessions/{session_id}/graph")
    def graph_route(session_id: str, req: GraphRequest):
        session = state.get(session_id)
        if req.mode == "sync":
            return _graph_payload(session, req)
        if req.mode != "async":
            raise SemanticError(f"unknown mode {req.mode!r}")
        job_id = uuid.uuid4().hex[:12]
        job = {"status": "pending", "result": None, "error": None}
        session.jobs[job_id] = job

        def run():
            try:
                job["result"] = _graph_payload(session, req)
                job["status"] = "done"
            except NexusError as err:
                job["error"] = _classify(err).body()["error"]
                job["status"] = "error"
            except Exception as err:  # pragma: no cover - defensive
                job["error"] = {"code": "internal", "message": str(err),
                                "detail": None}
                job["status"] = "error"

        state.pool.submit(run)
        return {"job_id": job_id, "status": "pending"}

    @app.get("/sessions/{session_id}/jobs/{job_id}")
    def job_status(session_id: str, job_id: str):
        session = state.get(session_id)
        job = session.jobs.get(job_id)
        if job is None:
            raise ServiceError("not-found", f"no job {job_id!r}")
        body = {"job_id": job_id, "status": job["status"]}
        if job["status"] == "done":
            body["result"] = job["result"]
        elif job["status"] == "error":
            body["error"] = job["error"]
        return body

    return app


app = create_app()


def serve(port: Optional[int] = None, host: str = "127.0.0.1") -> None:
    """Run the service on the loopback interface (blocking)."""
    import uvicorn

    if port is None:
        port = int(os.environ.get("NEXUS_PORT", DEFAULT_PORT))
    uvicorn.run(app, host=host, port=port, log_level="info")
