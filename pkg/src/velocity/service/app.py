"""HTTP facade over a live session: positions, prices, options, admin, SSE."""
from __future__ import annotations

import json
import queue
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .session import ApiError, Session


class PositionRequest(BaseModel):
    account: str
    side: str
    deposit: str  # wei, decimal string


class StepRequest(BaseModel):
    blocks: int


def create_app(session: Session, ui_dir: str | Path | None = None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        session.close()

    app = FastAPI(title="velocity", version="0.1.0", lifespan=lifespan)
    app.state.session = session

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.get("/status")
    def status():
        return session.status()

    @app.get("/accounts")
    def accounts():
        return session.balances()

    @app.post("/positions", status_code=201)
    def positions(req: PositionRequest):
        try:
            deposit = int(req.deposit)
        except ValueError:
            raise ApiError(400, "BAD_DEPOSIT", "deposit must be a wei decimal string")
        return session.submit_position(req.account, req.side, deposit)

    @app.get("/prices")
    def prices(request: Request):
        params = request.query_params
        try:
            start = int(params["from"])
            end = int(params["to"])
        except (KeyError, ValueError):
            raise ApiError(400, "BAD_RANGE", "from and to must be block numbers")
        return session.prices(start, end)

    @app.get("/options")
    def options(owner: str | None = None, state: str | None = None):
        if state not in (None, "open", "closed"):
            raise ApiError(400, "BAD_STATE", "state must be open or closed")
        return session.options(owner=owner, state=state)

    @app.get("/options/{option_id}")
    def option(option_id: int):
        return session.option(option_id)

    @app.post("/admin/step")
    def step(req: StepRequest):
        return session.step(req.blocks)

    @app.post("/admin/sweep")
    def sweep():
        return session.sweep().as_dict()

    @app.get("/events")
    def events():
        q = session.subscribe()

        def stream():
            try:
                hello = {"height": session.snapshot.height,
                         "mode": session.config.mode}
                yield f"event: hello\ndata: {json.dumps(hello)}\n\n"
                while not session.stopping():
                    try:
                        name, payload = q.get(timeout=0.25)
                        yield f"event: {name}\ndata: {json.dumps(payload)}\n\n"
                    except queue.Empty:
                        yield ": keepalive\n\n"
            finally:
                session.unsubscribe(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    ui = Path(ui_dir) if ui_dir else None
    if ui is not None and (ui / "index.html").exists():
        @app.get("/", include_in_schema=False)
        def index():
            return FileResponse(ui / "index.html")

        if (ui / "dist").exists():
            app.mount("/dist", StaticFiles(directory=ui / "dist"), name="dist")

    return app
