"""Request/response models for the studio service wire contract."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from .compose import ComposedPanel
from .engines import EngineListing
from .geometry import CropSpec
from .prepare import PreparationFailure, PreparedRegion
from .session import SessionStatus
from .store import CompositionRecord, MappedRecord, PanelRecord


class ApiError(BaseModel):
    code: str
    message: str
    retryable: bool = False


class PanelInfo(BaseModel):
    panel_id: str
    width: int
    height: int
    channels: int

    @classmethod
    def from_record(cls, record: PanelRecord) -> "PanelInfo":
        return cls(
            panel_id=record.panel_id,
            width=record.width,
            height=record.height,
            channels=record.channels,
        )


class PanelList(BaseModel):
    panels: list[PanelInfo]


class RectIn(BaseModel):
    x: float
    y: float
    width: float = Field(ge=0)
    height: float = Field(ge=0)


class SquareBox(BaseModel):
    x: int
    y: int
    side: int

    @classmethod
    def from_spec(cls, spec: CropSpec) -> "SquareBox":
        return cls(x=int(spec.square.origin_x), y=int(spec.square.origin_y), side=spec.side)


class RegionOut(BaseModel):
    panel_id: str
    face_index: int
    origin: Literal["auto", "manual"]
    warnings: list[str]
    square: SquareBox
    scale: float

    @classmethod
    def from_region(cls, region: PreparedRegion) -> "RegionOut":
        spec = region.crop_spec
        return cls(
            panel_id=spec.panel_id,
            face_index=region.face_index,
            origin=region.origin,  # type: ignore[arg-type]
            warnings=list(region.warnings),
            square=SquareBox.from_spec(spec),
            scale=float(spec.scale),
        )


class HullOut(BaseModel):
    x: float
    y: float
    width: float
    height: float


class FailureOut(BaseModel):
    input_index: int
    code: str
    message: str
    hull: Optional[HullOut] = None

    @classmethod
    def from_failure(cls, failure: PreparationFailure) -> "FailureOut":
        hull = None
        if failure.hull is not None:
            hull = HullOut(
                x=failure.hull.origin_x,
                y=failure.hull.origin_y,
                width=failure.hull.width,
                height=failure.hull.height,
            )
        return cls(input_index=failure.input_index, code=failure.code, message=failure.message, hull=hull)


class DetectIn(BaseModel):
    detector: str
    pad_frac: Optional[float] = Field(default=None, ge=0.0, le=1.0)


class DetectOut(BaseModel):
    regions: list[RegionOut]
    failures: list[FailureOut]


class ManualRegionIn(BaseModel):
    rect: RectIn


class RegionList(BaseModel):
    regions: list[RegionOut]


class EngineInfo(BaseModel):
    name: str
    deterministic: bool
    max_concurrency: int


class EnginesOut(BaseModel):
    engines: list[EngineInfo]
    diagnostics: list[str]

    @classmethod
    def from_listing(cls, listing: EngineListing) -> "EnginesOut":
        return cls(
            engines=[
                EngineInfo(
                    name=d.name, deterministic=d.deterministic, max_concurrency=d.max_concurrency
                )
                for d in listing.engines
            ],
            diagnostics=list(listing.diagnostics),
        )


class CreateSessionIn(BaseModel):
    panel_id: str
    face_index: int
    engine: str
    mode: Literal["relative", "absolute"] = "relative"
    frames_dir: Optional[str] = None
    frames_b64: Optional[list[str]] = None
    keep_every: Optional[int] = Field(default=None, ge=1)


class SessionCreated(BaseModel):
    session_id: str
    frame_count: int


class FramesIn(BaseModel):
    indices: list[int]


class FramesAccepted(BaseModel):
    accepted: list[int]


class ParamsIn(BaseModel):
    eye: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    lip: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    mode: Optional[Literal["relative", "absolute"]] = None


class SelectIn(BaseModel):
    index: int


class StatusOut(BaseModel):
    session_id: str
    state: Literal["created", "generating", "browsable", "committed"]
    frame_count: int
    available_indices: list[int]
    selected_index: Optional[int]
    mode: Literal["relative", "absolute"]
    eye: Optional[float]
    lip: Optional[float]
    frame_errors: dict[int, str]

    @classmethod
    def from_status(cls, session_id: str, status: SessionStatus) -> "StatusOut":
        return cls(
            session_id=session_id,
            state=status.state,  # type: ignore[arg-type]
            frame_count=status.frame_count,
            available_indices=status.available_indices,
            selected_index=status.selected_index,
            mode=status.mode.value,  # type: ignore[arg-type]
            eye=status.params.eye_openness,
            lip=status.params.lip_openness,
            frame_errors=status.frame_errors,
        )


class ProvenanceOut(BaseModel):
    engine: str
    frame_index: int
    mode: Literal["relative", "absolute"]
    eye: Optional[float]
    lip: Optional[float]


class MappedOut(BaseModel):
    mapped_id: str
    panel_id: str
    square: SquareBox
    provenance: ProvenanceOut

    @classmethod
    def from_record(cls, record: MappedRecord) -> "MappedOut":
        return cls(
            mapped_id=record.mapped_id,
            panel_id=record.crop_spec.panel_id,
            square=SquareBox.from_spec(record.crop_spec),
            provenance=ProvenanceOut(
                engine=record.provenance.engine,
                frame_index=record.provenance.frame_index,
                mode=record.provenance.mode.value,  # type: ignore[arg-type]
                eye=record.provenance.params.eye_openness,
                lip=record.provenance.params.lip_openness,
            ),
        )


class ImportMappedIn(BaseModel):
    panel_id: str
    square: SquareBox
    image_b64: str
    provenance: ProvenanceOut


class ComposeIn(BaseModel):
    mapped_ids: list[str]
    feather_width: int = Field(default=0, ge=0)


class SeamOut(BaseModel):
    square: SquareBox
    margin: int
    band_pixel_count: int
    inner_mean_abs: list[float]
    outer_mean_abs: list[float]
    band_mean_abs: list[float]
    band_max_abs: int


class ComposeOut(BaseModel):
    composed_id: str
    panel_id: str
    feather_width: int
    warnings: list[str]
    seams: list[SeamOut]

    @classmethod
    def from_result(cls, record: CompositionRecord, result: ComposedPanel) -> "ComposeOut":
        return cls(
            composed_id=record.composed_id,
            panel_id=record.panel_id,
            feather_width=record.feather_width,
            warnings=list(result.warnings),
            seams=[
                SeamOut(
                    square=SquareBox.from_spec(face.crop_spec),
                    margin=face.margin,
                    band_pixel_count=face.band_pixel_count,
                    inner_mean_abs=list(face.inner_mean_abs),
                    outer_mean_abs=list(face.outer_mean_abs),
                    band_mean_abs=list(face.band_mean_abs),
                    band_max_abs=face.band_max_abs,
                )
                for face in result.seams.faces
            ],
        )
