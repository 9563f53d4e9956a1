"""HTTP facade: sessions, pipeline editing, execution and stage previews.

Every error response carries a structured body {code, message, details}.
Requests within one session are serialized by a per-session lock; distinct
sessions run concurrently on the threadpool.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import uvicorn
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool

from .blocks import catalog_document
from .codecs import decode_png, encode_png
from .engine import (
    PipelineState,
    carry_outputs,
    contours_document,
    execute,
    histogram_document,
    pipeline_from_doc,
    pipeline_to_doc,
    stage_kind,
)
from .errors import DecodeError, EmptyStackError, TemplateError, UnknownOperatorError, UnsupportedFormatError
from .history import HistoryStack
from .raster import Image
from .rules import validate

TEMPLATE_NAME_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


@dataclass
class Settings:
    listen: str = "127.0.0.1:8650"
    template_dir: str = "templates"
    max_dimension: int = 4096
    session_ttl_seconds: float = 3600.0
    max_sessions: int = 256


@dataclass
class Session:
    session_id: str
    history: HistoryStack = field(default_factory=HistoryStack)
    source: Image | None = None
    last_activity: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_recomputed_from: int = 0

    def touch(self):
        self.last_activity = time.monotonic()


class SessionStore:
    def __init__(self, ttl_seconds: float, max_sessions: int):
        self.ttl = ttl_seconds
        self.max_sessions = max_sessions
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def sweep(self) -> None:
        now = time.monotonic()
        with self._lock:
            expired = [sid for sid, s in self._sessions.items()
                       if now - s.last_activity > self.ttl]
            for sid in expired:
                del self._sessions[sid]

    def create(self) -> Session:
        self.sweep()
        with self._lock:
            if len(self._sessions) >= self.max_sessions:
                raise _ApiError(503, "SERVICE_BUSY", "session capacity exceeded")
            session = Session(uuid.uuid4().hex)
            self._sessions[session.session_id] = session
            return session

    def get(self, session_id: str) -> Session:
        self.sweep()
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise _ApiError(404, "SESSION_NOT_FOUND", f"no session {session_id!r}")
        session.touch()
        return session


class _ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.details = details or {}


def _error_response(exc: _ApiError) -> JSONResponse:
    return JSONResponse(
        {"code": exc.code, "message": exc.message, "details": exc.details},
        status_code=exc.status,
    )


async def _json_body(request: Request) -> dict:
    try:
        body = json.loads(await request.body())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise _ApiError(400, "MALFORMED_BODY", f"request body is not valid JSON: {exc}")
    if not isinstance(body, dict):
        raise _ApiError(400, "MALFORMED_BODY", "request body must be a JSON object")
    return body


def _preview_descriptor(index: int, output) -> dict:
    kind = stage_kind(output)
    descriptor = {"stage": index, "op": output.op, "kind": kind}
    if output.error is not None:
        descriptor["error"] = output.error
    elif output.image is not None:
        descriptor["width"] = output.image.width
        descriptor["height"] = output.image.height
        descriptor["format"] = output.image.format
    return descriptor


def create_app(settings: Settings | None = None) -> FastAPI:
    settings = settings or Settings()
    store = SessionStore(settings.session_ttl_seconds, settings.max_sessions)
    template_dir = Path(settings.template_dir)
    app = FastAPI(title="imagelab service", version="0.1.0")
    app.state.settings = settings
    app.state.sessions = store
    # the block editor is served separately during development
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(_ApiError)
    async def _handle_api_error(_request, exc: _ApiError):
        return _error_response(exc)

    # -- sessions ---------------------------------------------------------

    @app.post("/api/sessions", status_code=201)
    async def create_session():
        session = store.create()
        return {"session_id": session.session_id}

    @app.post("/api/sessions/{session_id}/source")
    async def upload_source(session_id: str, request: Request):
        session = store.get(session_id)
        body = await request.body()

        def work():
            with session.lock:
                try:
                    image = decode_png(body)
                except (DecodeError, UnsupportedFormatError) as exc:
                    raise _ApiError(400, "DECODE_ERROR", str(exc))
                if image.width > settings.max_dimension or image.height > settings.max_dimension:
                    raise _ApiError(
                        413, "IMAGE_TOO_LARGE",
                        f"image {image.width}x{image.height} exceeds "
                        f"{settings.max_dimension}x{settings.max_dimension}",
                    )
                session.source = image
                session.history.clear_outputs()
                return {"width": image.width, "height": image.height, "format": image.format}

        return await run_in_threadpool(work)

    @app.put("/api/sessions/{session_id}/pipeline")
    async def put_pipeline(session_id: str, request: Request):
        session = store.get(session_id)
        body = await _json_body(request)

        def work():
            with session.lock:
                try:
                    pipeline = pipeline_from_doc(body)
                except TemplateError as exc:
                    raise _ApiError(400, "MALFORMED_PIPELINE", str(exc))
                except UnknownOperatorError as exc:
                    raise _ApiError(400, "UNKNOWN_OPERATOR", str(exc))
                violations = validate(list(pipeline.blocks))
                if violations:
                    raise _ApiError(
                        422, "VALIDATION_FAILED", "pipeline rejected by the rule engine",
                        {"violations": [v.as_dict() for v in violations]},
                    )
                session.history.push(carry_outputs(session.history.current, pipeline))
                return {"ok": True, "pipeline": pipeline_to_doc(pipeline)}

        return await run_in_threadpool(work)

    @app.get("/api/sessions/{session_id}/pipeline")
    async def get_pipeline(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return {"pipeline": pipeline_to_doc(session.history.current.pipeline)}

    @app.post("/api/sessions/{session_id}/execute")
    async def execute_session(session_id: str):
        session = store.get(session_id)

        def work():
            with session.lock:
                state = session.history.current
                if not state.pipeline.blocks:
                    raise _ApiError(409, "EMPTY_PIPELINE", "add blocks before executing")
                if session.source is None:
                    raise _ApiError(409, "NO_SOURCE_IMAGE", "upload a source image first")
                from_stage = state.computed_stages
                new_state = execute(state, session.source, from_stage=from_stage)
                session.history.replace_current(new_state)
                session.last_recomputed_from = from_stage
                return {
                    "recomputed_from": from_stage,
                    "previews": [
                        _preview_descriptor(i, out) for i, out in enumerate(new_state.outputs)
                    ],
                }

        return await run_in_threadpool(work)

    @app.get("/api/sessions/{session_id}/previews/{stage}")
    async def get_preview(session_id: str, stage: int):
        session = store.get(session_id)
        with session.lock:
            state = session.history.current
            if stage < 0 or stage >= len(state.outputs):
                raise _ApiError(404, "STAGE_NOT_COMPUTED",
                                f"stage {stage} has no computed preview")
            output = state.outputs[stage]
            kind = stage_kind(output)
            if kind == "ERROR":
                return JSONResponse({"kind": "ERROR", "op": output.op, "error": output.error})
            if kind == "HISTOGRAM":
                return JSONResponse(histogram_document(output.product))
            if kind == "CONTOURS":
                return JSONResponse(contours_document(output.product))
            return Response(encode_png(output.image), media_type="image/png")

    @app.post("/api/sessions/{session_id}/undo")
    async def undo_session(session_id: str):
        session = store.get(session_id)
        with session.lock:
            try:
                state = session.history.undo()
            except EmptyStackError as exc:
                raise _ApiError(409, "NOTHING_TO_UNDO", str(exc))
            return {"pipeline": pipeline_to_doc(state.pipeline)}

    @app.post("/api/sessions/{session_id}/redo")
    async def redo_session(session_id: str):
        session = store.get(session_id)
        with session.lock:
            try:
                state = session.history.redo()
            except EmptyStackError as exc:
                raise _ApiError(409, "NOTHING_TO_REDO", str(exc))
            return {"pipeline": pipeline_to_doc(state.pipeline)}

    @app.get("/api/sessions/{session_id}/history")
    async def export_history(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return session.history.export()

    # -- catalog and templates ---------------------------------------------

    @app.get("/api/catalog")
    async def get_catalog():
        return catalog_document()

    @app.get("/api/templates")
    async def list_templates():
        if not template_dir.is_dir():
            return {"templates": []}
        names = sorted(p.stem for p in template_dir.glob("*.json"))
        return {"templates": names}

    @app.post("/api/templates", status_code=201)
    async def save_template_endpoint(request: Request):
        body = await _json_body(request)
        name = body.get("name")
        if not isinstance(name, str) or not TEMPLATE_NAME_RE.match(name):
            raise _ApiError(400, "BAD_TEMPLATE_NAME",
                            "template names must match [A-Za-z0-9_-]{1,64}")
        session = store.get(str(body.get("session_id")))
        with session.lock:
            doc = pipeline_to_doc(session.history.current.pipeline)
        template_dir.mkdir(parents=True, exist_ok=True)
        path = template_dir / f"{name}.json"
        try:
            with open(path, "x") as fh:
                json.dump(doc, fh, indent=2)
        except FileExistsError:
            raise _ApiError(409, "TEMPLATE_EXISTS", f"template {name!r} already exists")
        return {"name": name, "pipeline": doc}

    @app.get("/api/templates/{name}")
    async def load_template_endpoint(name: str):
        if not TEMPLATE_NAME_RE.match(name):
            raise _ApiError(400, "BAD_TEMPLATE_NAME",
                            "template names must match [A-Za-z0-9_-]{1,64}")
        path = template_dir / f"{name}.json"
        if not path.is_file():
            raise _ApiError(404, "TEMPLATE_NOT_FOUND", f"no template {name!r}")
        doc = json.loads(path.read_text())
        try:
            pipeline = pipeline_from_doc(doc)
        except (TemplateError, UnknownOperatorError) as exc:
            raise _ApiError(500, "TEMPLATE_CORRUPT", str(exc))
        violations = validate(list(pipeline.blocks))
        return {
            "name": name,
            "pipeline": pipeline_to_doc(pipeline),
            "violations": [v.as_dict() for v in violations],
        }

    return app


def main(argv=None) -> int:
    env = os.environ
    parser = argparse.ArgumentParser(prog="imagelab-service",
                                     description="Run the imagelab HTTP service.")
    parser.add_argument("--listen", default=env.get("IMAGELAB_LISTEN", "127.0.0.1:8650"),
                        help="host:port to bind")
    parser.add_argument("--template-dir", default=env.get("IMAGELAB_TEMPLATE_DIR", "templates"))
    parser.add_argument("--max-dimension", type=int,
                        default=int(env.get("IMAGELAB_MAX_DIMENSION", "4096")))
    parser.add_argument("--session-ttl", type=float,
                        default=float(env.get("IMAGELAB_SESSION_TTL", "3600")),
                        help="idle session lifetime in seconds")
    args = parser.parse_args(argv)
    host, _, port = args.listen.rpartition(":")
    settings = Settings(
        listen=args.listen,
        template_dir=args.template_dir,
        max_dimension=args.max_dimension,
        session_ttl_seconds=args.session_ttl,
    )
    app = create_app(settings)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
    return 0


if __name__ == "__main__":
    main()
