"""panelface: nuanced facial expressions for characters in static manga panels.

Three stages: prepare square face regions (auto landmarks or manual frames),
map expressions from a driving performance with per-frame scrub-and-select
plus eye/lip retargeting, and compose the result back at its exact original
coordinates.  The ML reenactment/detection engines sit behind deterministic
adapter contracts, so the whole pipeline is testable without them.
"""

from .compose import ComposedPanel, SeamReport, compose, seam_metrics
from .engines import (
    EngineRegistry,
    IdentityEngine,
    MotionMode,
    ReenactedFrame,
    RetargetParams,
    StampEngine,
    read_stamp,
    reenact,
)
from .errors import PanelfaceError
from .geometry import (
    BBox,
    CANONICAL_SIZE,
    CropSpec,
    DEFAULT_PAD_FRAC,
    LandmarkSet,
    MIN_SIDE,
    Point2D,
    clamp_square,
    make_crop_spec,
    squarify_pad,
    tight_bbox,
)
from .prepare import (
    DetectedFace,
    DetectorAdapter,
    FixtureDetector,
    PreparedRegion,
    detect_faces,
    manual_frame,
    prepare_regions,
)
from .raster import decode_png, encode_png, extract_crop, load_png, resize_bilinear, save_png
from .session import (
    DrivingPerformance,
    MappedFace,
    MappingSession,
    create_session,
    ingest_performance,
)
from .store import Project, ProjectSettings, load, save
from .workspace import Workspace

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "CANONICAL_SIZE",
    "ComposedPanel",
    "CropSpec",
    "DEFAULT_PAD_FRAC",
    "DetectedFace",
    "DetectorAdapter",
    "DrivingPerformance",
    "EngineRegistry",
    "FixtureDetector",
    "IdentityEngine",
    "LandmarkSet",
    "MIN_SIDE",
    "MappedFace",
    "MappingSession",
    "MotionMode",
    "PanelfaceError",
    "Point2D",
    "PreparedRegion",
    "Project",
    "ProjectSettings",
    "ReenactedFrame",
    "RetargetParams",
    "SeamReport",
    "StampEngine",
    "Workspace",
    "clamp_square",
    "compose",
    "create_session",
    "decode_png",
    "detect_faces",
    "encode_png",
    "extract_crop",
    "ingest_performance",
    "load",
    "load_png",
    "make_crop_spec",
    "manual_frame",
    "prepare_regions",
    "read_stamp",
    "reenact",
    "resize_bilinear",
    "save",
    "save_png",
    "seam_metrics",
    "squarify_pad",
    "tight_bbox",
]
