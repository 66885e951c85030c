"""Local HTTP service exposing the engine to the browser UI and scripts.

All state lives in memory, keyed by session id. Mutations on one session
are serialised by a lock; a step request racing a concurrent change gets
409. Applied steps are pushed to /events subscribers as line-delimited
JSON, in order, exactly once."""
from __future__ import annotations

import argparse
import json
import queue
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .config import Configuration, supply_for
from .history import Trace, build_graph, graph_delta, rollback, trace_text, RollbackError
from .parser import ParseError, parse_program, parse_typedecls
from .printer import print_configuration
from .reduction import (
    ReductionError,
    StaleRedexError,
    apply_redex,
    enumerate_backward,
    enumerate_forward,
)
from .types import OutOfClass, SessionTypeError, typecheck_config, typecheck_process
from .config import forgetful_map

MAX_SOURCE = 200_000


class ProgramBody(BaseModel):
    source: str
    types: str | None = None


class StepBody(BaseModel):
    redex: str


class RollbackBody(BaseModel):
    memory: str


@dataclass
class SessionHandle:
    id: str
    config: Configuration
    trace: Trace
    supply: object
    seq: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)
    subscribers: list = field(default_factory=list)

    def publish(self, event: dict):
        self.seq += 1
        event["seq"] = self.seq
        for q in list(self.subscribers):
            q.put(event)


def _redex_json(r) -> dict:
    return {
        "key": r.key,
        "direction": r.direction,
        "rule": r.rule,
        "tags": [t.id for t in r.tags],
        "memory": r.memory,
        "branch": r.branch,
    }


def _type_report(cfg: Configuration, types_src: str | None) -> dict:
    if not types_src:
        return {"status": "skipped"}
    decls = parse_typedecls(types_src)
    try:
        if cfg.memories:
            res = typecheck_config(cfg, decls)
        else:
            res = typecheck_process(forgetful_map(cfg), decls)
    except SessionTypeError as e:
        raise _TypeFailure(e)
    if isinstance(res, OutOfClass):
        return {"status": "out-of-class", "detail": res.reason}
    return {"status": "well-typed", "completed": res.is_completed}


class _TypeFailure(Exception):
    def __init__(self, err: SessionTypeError):
        self.err = err


def create_app() -> FastAPI:
    app = FastAPI(title="respi explorer")
    sessions: dict[str, SessionHandle] = {}

    def get(sid: str) -> SessionHandle | None:
        return sessions.get(sid)

    @app.post("/programs")
    def create_program(body: ProgramBody):
        if len(body.source) > MAX_SOURCE:
            return JSONResponse({"error": "source too large"}, status_code=422)
        try:
            cfg = parse_program(body.source, "<posted>")
            report = _type_report(cfg, body.types)
        except ParseError as e:
            return JSONResponse(
                {
                    "error": {
                        "message": e.message,
                        "span": {
                            "start": e.span.start,
                            "end": e.span.end,
                            "line": e.span.line,
                            "column": e.span.column,
                        },
                    }
                },
                status_code=422,
            )
        except _TypeFailure as e:
            return JSONResponse(
                {"error": {"message": str(e.err), "kind": e.err.kind}}, status_code=422
            )
        sid = uuid.uuid4().hex[:12]
        handle = SessionHandle(sid, cfg, Trace(cfg), supply_for(cfg))
        sessions[sid] = handle
        return {
            "id": sid,
            "pretty": print_configuration(cfg),
            "type_report": report,
        }

    @app.get("/programs/{sid}")
    def get_program(sid: str):
        h = get(sid)
        if h is None:
            return JSONResponse({"error": "unknown program"}, status_code=404)
        return {
            "id": sid,
            "pretty": print_configuration(h.config),
            "steps": len(h.trace),
            "seq": h.seq,
        }

    @app.get("/programs/{sid}/redexes")
    def get_redexes(sid: str):
        h = get(sid)
        if h is None:
            return JSONResponse({"error": "unknown program"}, status_code=404)
        with h.lock:
            return {
                "forward": [_redex_json(r) for r in enumerate_forward(h.config)],
                "backward": [_redex_json(r) for r in enumerate_backward(h.config)],
            }

    @app.post("/programs/{sid}/step")
    def post_step(sid: str, body: StepBody):
        h = get(sid)
        if h is None:
            return JSONResponse({"error": "unknown program"}, status_code=404)
        with h.lock:
            enabled = {
                r.key: r
                for r in enumerate_forward(h.config) + enumerate_backward(h.config)
            }
            r = enabled.get(body.redex)
            if r is None:
                return JSONResponse(
                    {"error": f"redex {body.redex!r} is not enabled (stale?)"},
                    status_code=409,
                )
            old_graph = build_graph(h.config)
            try:
                new_cfg, step = apply_redex(h.config, r, h.supply)
            except (StaleRedexError, ReductionError) as e:
                return JSONResponse({"error": str(e)}, status_code=409)
            h.config = new_cfg
            h.trace = h.trace.extend(new_cfg, step)
            payload = {
                "config": print_configuration(new_cfg),
                "step": step.to_record(),
                "graph_delta": graph_delta(old_graph, build_graph(new_cfg)),
            }
            h.publish(dict(payload))
            return payload

    @app.post("/programs/{sid}/rollback")
    def post_rollback(sid: str, body: RollbackBody):
        h = get(sid)
        if h is None:
            return JSONResponse({"error": "unknown program"}, status_code=404)
        with h.lock:
            try:
                new_cfg, back_trace = rollback(h.config, body.memory, h.supply)
            except RollbackError as e:
                return JSONResponse({"error": str(e)}, status_code=404)
            old_graph = build_graph(h.config)
            h.config = new_cfg
            h.trace = Trace(h.trace.initial, h.trace.steps + back_trace.steps, new_cfg)
            payload = {
                "config": print_configuration(new_cfg),
                "steps": [s.to_record() for s in back_trace.steps],
                "graph_delta": graph_delta(old_graph, build_graph(new_cfg)),
            }
            h.publish(dict(payload))
            return payload

    @app.get("/programs/{sid}/graph")
    def get_graph(sid: str, format: str = "text"):
        h = get(sid)
        if h is None:
            return JSONResponse({"error": "unknown program"}, status_code=404)
        g = build_graph(h.config)
        if format == "json":
            return g.to_json()
        return PlainTextResponse(g.to_text())

    @app.get("/programs/{sid}/trace")
    def get_trace(sid: str):
        h = get(sid)
        if h is None:
            return JSONResponse({"error": "unknown program"}, status_code=404)
        return PlainTextResponse(trace_text(h.trace))

    @app.get("/programs/{sid}/events")
    def get_events(sid: str, limit: int = 0):
        h = get(sid)
        if h is None:
            return JSONResponse({"error": "unknown program"}, status_code=404)
        q: queue.Queue = queue.Queue()
        h.subscribers.append(q)

        def stream():
            sent = 0
            try:
                while True:
                    try:
                        event = q.get(timeout=30.0)
                    except queue.Empty:
                        yield json.dumps({"keepalive": True}) + "\n"
                        continue
                    yield json.dumps(event, sort_keys=True) + "\n"
                    sent += 1
                    if limit and sent >= limit:
                        return
            finally:
                if q in h.subscribers:
                    h.subscribers.remove(q)

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    return app


def main(argv=None) -> int:
    import uvicorn
    from pathlib import Path

    ap = argparse.ArgumentParser(prog="respi-explorer")
    ap.add_argument("--port", type=int, default=8321)
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--ui", metavar="DIR", help="serve a built frontend from this directory")
    args = ap.parse_args(argv)
    app = create_app()
    if args.ui and Path(args.ui).is_dir():
        app.mount("/", StaticFiles(directory=args.ui, html=True), name="ui")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    main()
