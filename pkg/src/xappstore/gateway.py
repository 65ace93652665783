"""HTTP/JSON gateway: onboarding, browsing, deploy/undeploy, RIC status and
logs, scenario control, and a server-sent event stream for the dashboard.

All registry/runtime errors map to exactly one (HTTP status, machine code)
pair; the dashboard and CLI rely on those codes being stable.
"""
from __future__ import annotations

import json
import queue
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .errors import InvalidTransition, XAppStoreError
from .manifest import manifest_to_dict
from .registry import LifecycleEvent, LifecycleState
from .scenario import ScenarioConfig
from .service import XAppStoreService

ERROR_STATUS = {
    "DUPLICATE_VERSION": 409,
    "UNKNOWN_ID": 404,
    "INVALID_TRANSITION": 409,
    "WRONG_STATE": 409,
    "MALFORMED_ARCHIVE": 400,
    "NOT_RUNNING": 404,
    "PARSE_ERROR": 400,
    "ALREADY_REGISTERED": 409,
    "UNKNOWN_ENDPOINT": 404,
    "IO_FAILURE": 500,
    "CORRUPT_STORE": 500,
    "INTERNAL": 500,
}


def record_detail(svc: XAppStoreService, record) -> dict:
    detail = record.summary()
    if record.manifest is not None:
        detail["manifest"] = manifest_to_dict(record.manifest)
    ric = svc.ric
    detail["deployed"] = bool(ric and record.id in ric.running)
    return detail


def create_app(svc: XAppStoreService, static_dir=None) -> FastAPI:
    app = FastAPI(title="xApp Store Gateway")
    app.state.service = svc

    @app.exception_handler(XAppStoreError)
    async def store_error(request: Request, exc: XAppStoreError):
        status = ERROR_STATUS.get(exc.code, 500)
        return JSONResponse(status_code=status,
                            content={"code": exc.code, "detail": exc.detail})

    @app.exception_handler(404)
    async def not_found(request: Request, exc):
        return JSONResponse(status_code=404,
                            content={"code": "NOT_FOUND",
                                     "detail": f"no route {request.url.path}"})

    # --- xApps ------------------------------------------------------------

    @app.post("/xapps", status_code=201)
    async def submit_xapp(request: Request):
        body = await request.body()
        record = svc.onboard(body)
        return record.summary()

    @app.get("/xapps")
    def list_xapps(state: str | None = None, q: str | None = None,
                   mtype: int | None = None):
        state_enum = LifecycleState(state) if state else None
        return [r.summary() for r in svc.store.search(
            name_substring=q, state=state_enum, mtype=mtype)]

    @app.get("/xapps/{record_id}")
    def get_xapp(record_id: str):
        return record_detail(svc, svc.store.get(record_id))

    @app.get("/xapps/{record_id}/report")
    def get_report(record_id: str):
        return svc.store.latest_report(record_id)

    @app.post("/xapps/{record_id}/deploy")
    def deploy_xapp(record_id: str):
        record = svc.store.get(record_id)
        if record.state != LifecycleState.AVAILABLE:
            raise InvalidTransition(record.state.value,
                                    LifecycleEvent.DEPLOY_REQUESTED.value)
        svc.deploy(record_id)
        return record_detail(svc, svc.store.get(record_id))

    @app.delete("/xapps/{record_id}/deploy")
    def undeploy_xapp(record_id: str):
        svc.store.get(record_id)
        svc.undeploy(record_id)
        return record_detail(svc, svc.store.get(record_id))

    # --- RIC --------------------------------------------------------------

    @app.get("/ric/status")
    def ric_status():
        return svc.ric_status()

    @app.get("/ric/logs")
    def ric_logs(since_seq: int = -1, limit: int = 500):
        entries = [r.to_json_obj() for r in svc.router.observation_log(since_seq)]
        return {"entries": entries[:limit],
                "next_seq": entries[:limit][-1]["seq"] if entries else since_seq}

    @app.get("/ric/audit")
    def audit_log():
        return {"entries": svc.store.audit_log()}

    # --- scenario ---------------------------------------------------------

    @app.post("/scenario")
    async def load_scenario(request: Request):
        body = await request.body()
        config = ScenarioConfig.from_json(body)
        svc.load_scenario(config)
        return svc.scenario_state()

    @app.post("/scenario/start")
    def start_scenario(pace_ms: int | None = None):
        svc.start_scenario(pace_ms)
        return svc.scenario_state()

    @app.post("/scenario/stop")
    def stop_scenario():
        svc.stop_scenario()
        return svc.scenario_state()

    @app.post("/scenario/step")
    def step_scenario(ticks: int = 1):
        svc.tick(max(1, min(ticks, 1000)))
        return svc.scenario_state()

    @app.get("/scenario/state")
    def scenario_state():
        return svc.scenario_state()

    # --- events -----------------------------------------------------------

    @app.get("/events/stream")
    def events_stream():
        q = svc.subscribe()

        def generate():
            try:
                yield "data: " + json.dumps({"kind": "STREAM_OPEN"}) + "\n\n"
                idle = 0
                while idle < 600:  # give up after ~60 s of silence
                    try:
                        event = q.get(timeout=0.1)
                        idle = 0
                        yield "data: " + json.dumps(event, default=str) + "\n\n"
                    except queue.Empty:
                        idle += 1
                        if idle % 50 == 0:
                            yield ": keepalive\n\n"
            finally:
                svc.unsubscribe(q)

        return StreamingResponse(generate(), media_type="text/event-stream")

    @app.on_event("shutdown")
    def shutdown():
        svc.shutdown()

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="dashboard")

    return app


def default_static_dir():
    """frontend/dist next to the repo root, when present."""
    here = Path(__file__).resolve()
    for parent in here.parents:
        candidate = parent / "frontend" / "dist"
        if candidate.is_dir():
            return candidate
    return None
