"""The studio service: the three pipeline stages behind a polling HTTP API.

Every endpoint is a thin shim over the workspace; behavior is point-
identical to the library calls, and every library error surfaces with its
own code in the ``{code, message, retryable}`` error body.  Reads
(status, frames, exports) never mutate state; progressive generation is
request-then-poll.
"""

from __future__ import annotations

import base64
import binascii

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from . import schemas
from .engines import MotionMode, RetargetParams
from .errors import (
    AdapterUnavailable,
    EngineFailure,
    FrameNotGenerated,
    IntegrityError,
    IOFailure,
    MissingManifest,
    NothingSelected,
    NotFound,
    PanelfaceError,
    SessionCommitted,
    StaleSelection,
    UnreadableMedia,
)
from .geometry import BBox
from .session import DrivingPerformance, Provenance, ingest_performance
from .raster import decode_png
from .workspace import Workspace

_STATUS_BY_ERROR: dict[type[PanelfaceError], int] = {
    NotFound: 404,
    FrameNotGenerated: 404,
    MissingManifest: 404,
    NothingSelected: 409,
    StaleSelection: 409,
    SessionCommitted: 409,
    EngineFailure: 502,
    AdapterUnavailable: 503,
    IOFailure: 500,
    IntegrityError: 500,
}


def _http_status(exc: PanelfaceError) -> int:
    for klass, status in _STATUS_BY_ERROR.items():
        if isinstance(exc, klass):
            return status
    return 400


def create_app(workspace: Workspace) -> FastAPI:
    app = FastAPI(title="panelface studio service", version="0.1.0")
    app.state.workspace = workspace

    @app.exception_handler(PanelfaceError)
    async def panelface_error_handler(request: Request, exc: PanelfaceError) -> JSONResponse:
        body = schemas.ApiError(code=exc.code, message=str(exc), retryable=exc.retryable)
        return JSONResponse(status_code=_http_status(exc), content=body.model_dump())

    # -- panels -----------------------------------------------------------

    @app.post("/panels", response_model=schemas.PanelInfo)
    async def create_panel(request: Request) -> schemas.PanelInfo:
        record = workspace.create_panel(await request.body())
        return schemas.PanelInfo.from_record(record)

    @app.get("/panels", response_model=schemas.PanelList)
    def list_panels() -> schemas.PanelList:
        return schemas.PanelList(
            panels=[schemas.PanelInfo.from_record(r) for r in workspace.panels.values()]
        )

    @app.get("/panels/{panel_id}/image")
    def panel_image(panel_id: str) -> Response:
        return Response(content=workspace.export_png(panel_id), media_type="image/png")

    # -- stage 1 ----------------------------------------------------------

    @app.post("/panels/{panel_id}/detect", response_model=schemas.DetectOut)
    def auto_detect(panel_id: str, body: schemas.DetectIn) -> schemas.DetectOut:
        regions, failures = workspace.auto_detect(panel_id, body.detector, pad_frac=body.pad_frac)
        return schemas.DetectOut(
            regions=[schemas.RegionOut.from_region(r) for r in regions],
            failures=[schemas.FailureOut.from_failure(f) for f in failures],
        )

    @app.post("/panels/{panel_id}/regions", response_model=schemas.RegionOut)
    def manual_region(panel_id: str, body: schemas.ManualRegionIn) -> schemas.RegionOut:
        rect = BBox(body.rect.x, body.rect.y, body.rect.width, body.rect.height)
        return schemas.RegionOut.from_region(workspace.manual_region(panel_id, rect))

    @app.get("/panels/{panel_id}/regions", response_model=schemas.RegionList)
    def list_regions(panel_id: str) -> schemas.RegionList:
        return schemas.RegionList(
            regions=[schemas.RegionOut.from_region(r) for r in workspace.regions_for(panel_id)]
        )

    # -- stage 2 ----------------------------------------------------------

    @app.get("/engines", response_model=schemas.EnginesOut)
    def list_engines() -> schemas.EnginesOut:
        return schemas.EnginesOut.from_listing(workspace.list_engines())

    @app.post("/sessions", response_model=schemas.SessionCreated)
    def create_session(body: schemas.CreateSessionIn) -> schemas.SessionCreated:
        if body.frames_dir is not None:
            performance = ingest_performance(body.frames_dir, keep_every=body.keep_every)
        elif body.frames_b64 is not None:
            try:
                frames = tuple(decode_png(base64.b64decode(b)) for b in body.frames_b64)
            except binascii.Error as exc:
                raise UnreadableMedia(f"frame upload is not valid base64: {exc}") from exc
            performance = DrivingPerformance(frames=frames, source_label="upload")
        else:
            raise UnreadableMedia("provide frames_dir or frames_b64")
        session = workspace.create_mapping(
            body.panel_id,
            body.face_index,
            performance,
            body.engine,
            mode=MotionMode(body.mode),
        )
        return schemas.SessionCreated(
            session_id=session.session_id, frame_count=len(session.performance)
        )

    @app.post("/sessions/{session_id}/frames", response_model=schemas.FramesAccepted)
    def request_frames(session_id: str, body: schemas.FramesIn) -> schemas.FramesAccepted:
        workspace.request_frames(session_id, body.indices)
        return schemas.FramesAccepted(accepted=sorted(set(body.indices)))

    @app.get("/sessions/{session_id}", response_model=schemas.StatusOut)
    def get_status(session_id: str) -> schemas.StatusOut:
        return schemas.StatusOut.from_status(session_id, workspace.session_status(session_id))

    @app.get("/sessions/{session_id}/frames/{index}")
    def get_frame(session_id: str, index: int) -> Response:
        return Response(content=workspace.frame_png(session_id, index), media_type="image/png")

    @app.post("/sessions/{session_id}/params", response_model=schemas.StatusOut)
    def set_session_params(session_id: str, body: schemas.ParamsIn) -> schemas.StatusOut:
        params = RetargetParams(eye_openness=body.eye, lip_openness=body.lip)
        mode = None if body.mode is None else MotionMode(body.mode)
        return schemas.StatusOut.from_status(
            session_id, workspace.set_session_params(session_id, params, mode)
        )

    @app.post("/sessions/{session_id}/select", response_model=schemas.StatusOut)
    def select_keyframe(session_id: str, body: schemas.SelectIn) -> schemas.StatusOut:
        return schemas.StatusOut.from_status(
            session_id, workspace.select_keyframe(session_id, body.index)
        )

    @app.post("/sessions/{session_id}/commit", response_model=schemas.MappedOut)
    def commit_session(session_id: str) -> schemas.MappedOut:
        return schemas.MappedOut.from_record(workspace.commit_session(session_id))

    @app.post("/mapped/import", response_model=schemas.MappedOut)
    def import_mapped(body: schemas.ImportMappedIn) -> schemas.MappedOut:
        try:
            png = base64.b64decode(body.image_b64)
        except binascii.Error as exc:
            raise UnreadableMedia(f"mapped crop is not valid base64: {exc}") from exc
        square = BBox(
            float(body.square.x), float(body.square.y), float(body.square.side), float(body.square.side)
        )
        provenance = Provenance(
            engine=body.provenance.engine,
            frame_index=body.provenance.frame_index,
            mode=MotionMode(body.provenance.mode),
            params=RetargetParams(
                eye_openness=body.provenance.eye, lip_openness=body.provenance.lip
            ),
        )
        record = workspace.import_mapped(body.panel_id, square, png, provenance)
        return schemas.MappedOut.from_record(record)

    # -- stage 3 ----------------------------------------------------------

    @app.post("/panels/{panel_id}/compose", response_model=schemas.ComposeOut)
    def compose_panel(panel_id: str, body: schemas.ComposeIn) -> schemas.ComposeOut:
        record, result = workspace.compose_panel(
            panel_id, body.mapped_ids, feather_width=body.feather_width
        )
        return schemas.ComposeOut.from_result(record, result)

    @app.get("/export/{item_id}")
    def export_item(item_id: str) -> Response:
        return Response(content=workspace.export_png(item_id), media_type="image/png")

    @app.get("/project")
    def project_manifest() -> dict:
        return workspace.manifest()

    return app
