"""HTTP service around the session model.

Sessions live in process memory. Each one records every event it
applies, so GET /script returns a replay file that reproduces the
session from scratch; that same file is accepted by the CLI replay
command, which is how UI sessions are checked against the reference
implementation.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Request, Response
from fastapi.staticfiles import StaticFiles

from .. import analysis, session as sess, shapes
from ..errors import MeshLensError
from ..image import Frame, write_pgm
from ..stl import parse_stl, weld_vertices
from ..vision import (
    CameraIntrinsics,
    DetectConfig,
    Detection,
    detect_marker,
    pattern_to_text,
    reference_marker_frame,
    reference_pattern,
)
from . import schemas

MAX_STL_BYTES = 50 * 1024 * 1024
MAX_FRAME_SIDE = 4096


@dataclass
class SessionRecord:
    state: sess.SessionState
    marker_side: float
    fx: float
    fy: float
    cx: float | None
    cy: float | None
    events: list = field(default_factory=list)
    reports: dict = field(default_factory=dict)  # catalog index -> report dict
    lock: threading.Lock = field(default_factory=threading.Lock)

    def apply(self, event) -> None:
        self.state = sess.apply_event(self.state, event)
        self.events.append(event)


def _state_out(record: SessionRecord) -> dict:
    return sess.state_to_dict(record.state)


def _detection_out(det: Detection) -> dict:
    return {
        "confidence": det.confidence,
        "rotation_index": det.rotation_index,
        "yaw_rad": det.yaw,
        "corners_px": [[float(u), float(v)] for u, v in det.corners],
        "rotation": [[float(v) for v in row] for row in det.pose.rotation],
        "translation_mm": [float(v) for v in det.pose.translation],
        "reproj_error_px2": det.reproj_error,
    }


def _mesh_out(name: str, mesh) -> dict:
    return {
        "name": name,
        "vertices": [[float(v) for v in row] for row in mesh.vertices],
        "faces": [[int(i) for i in row] for row in mesh.faces],
    }


def create_app() -> FastAPI:
    app = FastAPI(title="meshlens", version="0.1.0")
    records: dict[str, SessionRecord] = {}
    pattern = reference_pattern()

    def get_record(session_id: str) -> SessionRecord:
        record = records.get(session_id)
        if record is None:
            raise HTTPException(404, "no such session")
        return record

    @app.post("/api/sessions", response_model=schemas.SessionOut)
    def create_session(body: schemas.SessionCreate):
        try:
            mode = sess.ScaleMode(body.scale_mode)
        except ValueError:
            raise HTTPException(422, f"unknown scale mode {body.scale_mode!r}")
        kwargs = {"scale_mode": mode, "target_extent": body.target_extent}
        if body.rotation_step is not None:
            kwargs["rotation_step"] = body.rotation_step
        if body.zoom_step is not None:
            kwargs["zoom_step"] = body.zoom_step
        try:
            config = sess.SessionConfig(**kwargs)
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        catalog = []
        if body.include_demo_catalog:
            catalog = [
                sess.CatalogEntry(name, mesh, category)
                for name, category, mesh in shapes.demo_catalog()
            ]
        session_id = uuid.uuid4().hex[:12]
        records[session_id] = SessionRecord(
            state=sess.init_session(config, catalog),
            marker_side=body.marker_side,
            fx=body.fx, fy=body.fy, cx=body.cx, cy=body.cy,
        )
        return {"session_id": session_id, "state": _state_out(records[session_id])}

    @app.get("/api/sessions/{session_id}", response_model=schemas.StateOut)
    def get_state(session_id: str):
        record = get_record(session_id)
        with record.lock:
            return _state_out(record)

    @app.post("/api/sessions/{session_id}/events", response_model=schemas.StateOut)
    def post_event(session_id: str, body: schemas.EventIn):
        record = get_record(session_id)
        if body.type == "upload_model":
            raise HTTPException(422, "upload models through POST .../model")
        try:
            event = sess.event_from_dict(body.model_dump(exclude_none=True))
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        with record.lock:
            record.apply(event)
            return _state_out(record)

    @app.post("/api/sessions/{session_id}/model", response_model=schemas.ModelUploadOut)
    async def upload_model(session_id: str, request: Request,
                           name: str = Query(..., min_length=1)):
        record = get_record(session_id)
        data = await request.body()
        if len(data) > MAX_STL_BYTES:
            raise HTTPException(413, "model too large")
        try:
            soup = parse_stl(data)
            mesh = weld_vertices(soup)
            report = analysis.analyze(mesh, soup)
        except MeshLensError as exc:
            raise HTTPException(422, f"bad model: {exc}")
        with record.lock:
            record.apply(sess.UploadModel(name, mesh))
            if record.state.selected is not None:
                record.reports[record.state.selected] = report.to_dict()
            return {
                "state": _state_out(record),
                "report": report.to_dict(),
                "mesh": _mesh_out(name, mesh),
            }

    @app.post("/api/sessions/{session_id}/frames", response_model=schemas.FrameOut)
    async def post_frame(session_id: str, request: Request,
                         width: int = Query(..., gt=0, le=MAX_FRAME_SIDE),
                         height: int = Query(..., gt=0, le=MAX_FRAME_SIDE)):
        record = get_record(session_id)
        data = await request.body()
        if len(data) != width * height:
            raise HTTPException(422, f"expected {width * height} grayscale bytes")
        try:
            frame = Frame(np.frombuffer(data, dtype=np.uint8).reshape(height, width))
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        intrinsics = CameraIntrinsics(
            record.fx, record.fy,
            record.cx if record.cx is not None else width / 2.0,
            record.cy if record.cy is not None else height / 2.0,
        )
        det = detect_marker(frame, pattern, intrinsics, record.marker_side, DetectConfig())
        with record.lock:
            record.apply(sess.MarkerUpdate(det))
            return {
                "detection": _detection_out(det) if det else None,
                "state": _state_out(record),
            }

    @app.get("/api/sessions/{session_id}/mesh", response_model=schemas.MeshWithReportOut)
    def get_mesh(session_id: str):
        record = get_record(session_id)
        with record.lock:
            entry = record.state.selected_entry
            if entry is None:
                return {"mesh": None, "report": None}
            report = record.reports.get(record.state.selected)
            if report is None:
                report = analysis.analyze(entry.mesh).to_dict()
                record.reports[record.state.selected] = report
            return {"mesh": _mesh_out(entry.name, entry.mesh), "report": report}

    @app.get("/api/sessions/{session_id}/script")
    def get_script(session_id: str):
        record = get_record(session_id)
        with record.lock:
            return [sess.event_to_dict(e) for e in record.events]

    @app.get("/api/marker.pgm")
    def get_marker(size: int = Query(256, ge=64, le=2048)):
        return Response(write_pgm(reference_marker_frame(size)), media_type="image/x-portable-graymap")

    @app.get("/api/pattern.txt")
    def get_pattern():
        return Response(pattern_to_text(pattern), media_type="text/plain")

    dist = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    if dist.is_dir():
        app.mount("/", StaticFiles(directory=dist, html=True), name="ui")
    return app
