"""Stage 1: dual-mode face preparation.

Auto mode runs a pluggable landmark detector and builds padded square
regions from the landmark hull (never from the detector's native box, which
is informational only).  Manual mode squarifies an artist-drawn rectangle.
Both modes land in the same ``PreparedRegion`` type, so downstream stages
cannot tell them apart except by the recorded origin.
"""

from __future__ import annotations

import json
import logging
import math
import shlex
import subprocess
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import numpy as np

from .errors import AdapterProtocolError, AdapterUnavailable, PanelfaceError, SideTooSmall
from .geometry import (
    BBox,
    CropSpec,
    LANDMARK_COUNT,
    LandmarkSet,
    clamp_square,
    make_crop_spec,
    round_half_away,
    squarify_pad,
    tight_bbox,
)
from .raster import encode_png, ensure_image

log = logging.getLogger(__name__)

WARN_SMALL_FACE = "small_face"
WARN_EXTREME_POSE = "extreme_pose"
WARN_LOW_CONFIDENCE = "low_confidence"


@dataclass(frozen=True)
class PrepSettings:
    """Thresholds for region warnings; the 45 degree pose gate is the one
    limit with empirical backing, the rest are exposed engineering picks."""

    pad_frac: float = 0.30
    small_face_side: float = 64.0
    extreme_pose_deg: float = 45.0
    low_confidence: float = 0.5


@dataclass(frozen=True)
class RawDetection:
    """One face exactly as the detector reported it, not yet validated."""

    landmarks: tuple[tuple[float, float], ...]
    confidence: float
    yaw_degrees: Optional[float] = None
    bbox_hint: Optional[BBox] = None


@dataclass(frozen=True)
class DetectedFace:
    """A validated detection: exactly 106 finite landmarks."""

    landmarks: LandmarkSet
    confidence: float
    yaw_degrees: Optional[float] = None
    bbox_hint: Optional[BBox] = None


@dataclass(frozen=True)
class PreparedRegion:
    crop_spec: CropSpec
    origin: str  # "auto" | "manual"
    warnings: tuple[str, ...]
    face_index: int


@dataclass(frozen=True)
class PreparationFailure:
    """A face that could not be prepared; the UI draws these in red."""

    input_index: int
    code: str
    message: str
    hull: Optional[BBox] = None


class DetectorAdapter(Protocol):
    """Behavioral contract for landmark detectors.

    ``detect`` must be deterministic for a fixed model version and input.
    """

    name: str
    max_concurrency: int

    def detect(self, panel: np.ndarray) -> list[RawDetection]: ...


def parse_face_document(text: str) -> list[RawDetection]:
    """Parse the detector wire format: a JSON array of faces, each
    ``{"landmarks": [[x, y] * n], "confidence": c, "yaw": optional}``.

    Structural problems raise AdapterProtocolError; landmark-count checks
    are left to ``detect_faces`` so single bad faces can be dropped.
    """
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise AdapterProtocolError(f"face document is not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise AdapterProtocolError("face document must be a JSON array of faces")
    faces: list[RawDetection] = []
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict):
            raise AdapterProtocolError(f"face {i} is not an object")
        lm = entry.get("landmarks")
        if not isinstance(lm, list):
            raise AdapterProtocolError(f"face {i} has no landmark array")
        pairs: list[tuple[float, float]] = []
        for j, pt in enumerate(lm):
            if not isinstance(pt, (list, tuple)) or len(pt) != 2 or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in pt
            ):
                raise AdapterProtocolError(f"face {i} landmark {j} is not an [x, y] pair")
            pairs.append((float(pt[0]), float(pt[1])))
        conf = entry.get("confidence")
        if not isinstance(conf, (int, float)) or isinstance(conf, bool):
            raise AdapterProtocolError(f"face {i} has no numeric confidence")
        yaw = entry.get("yaw")
        if yaw is not None and (not isinstance(yaw, (int, float)) or isinstance(yaw, bool)):
            raise AdapterProtocolError(f"face {i} yaw is not a number")
        hint = entry.get("bbox")
        bbox_hint = None
        if hint is not None:
            if not isinstance(hint, (list, tuple)) or len(hint) != 4:
                raise AdapterProtocolError(f"face {i} bbox hint is not [x, y, w, h]")
            bbox_hint = BBox(*(float(v) for v in hint))
        faces.append(
            RawDetection(
                landmarks=tuple(pairs),
                confidence=float(conf),
                yaw_degrees=None if yaw is None else float(yaw),
                bbox_hint=bbox_hint,
            )
        )
    return faces


class FixtureDetector:
    """In-process detector replaying a face document from disk.

    Used as the mock in tests and anywhere a canned detection is wanted.
    """

    def __init__(self, fixture_path, name: str = "mock", max_concurrency: int = 4):
        self.fixture_path = fixture_path
        self.name = name
        self.max_concurrency = max_concurrency

    def detect(self, panel: np.ndarray) -> list[RawDetection]:
        ensure_image(panel)
        try:
            with open(self.fixture_path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise AdapterUnavailable(f"detector fixture {self.fixture_path} unreadable: {exc}") from exc
        return parse_face_document(text)


class SubprocessDetector:
    """Out-of-process detector: PNG in on stdin, face document out on stdout."""

    def __init__(self, command: Sequence[str], name: str = "external", timeout_s: float = 60.0):
        self.command = list(command)
        self.name = name
        self.max_concurrency = 1
        self.timeout_s = timeout_s

    def detect(self, panel: np.ndarray) -> list[RawDetection]:
        try:
            proc = subprocess.run(
                self.command,
                input=encode_png(panel),
                capture_output=True,
                timeout=self.timeout_s,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise AdapterUnavailable(f"detector {self.name} unreachable: {exc}") from exc
        if proc.returncode != 0:
            raise AdapterUnavailable(
                f"detector {self.name} exited {proc.returncode}: {proc.stderr.decode(errors='replace')[:500]}"
            )
        return parse_face_document(proc.stdout.decode("utf-8", errors="replace"))


def make_detector(spec: str) -> DetectorAdapter:
    """Build a detector from a config string: ``mock:faces.json`` or
    ``cmd:./detect --flag``; a bare path implies the fixture detector."""
    if spec.startswith("mock:"):
        return FixtureDetector(spec[len("mock:") :])
    if spec.startswith("cmd:"):
        return SubprocessDetector(shlex.split(spec[len("cmd:") :]))
    return FixtureDetector(spec)


def detect_faces(panel: np.ndarray, adapter: DetectorAdapter) -> list[DetectedFace]:
    """Run the detector and keep only faces that pass validation.

    A face is dropped (with a logged diagnostic) when its landmark count is
    not 106, a coordinate is non-finite, confidence is outside [0, 1], or
    yaw is outside [-180, 180].
    """
    ensure_image(panel)
    faces: list[DetectedFace] = []
    for i, raw in enumerate(adapter.detect(panel)):
        if len(raw.landmarks) != LANDMARK_COUNT:
            log.warning("dropping face %d from %s: %d landmarks, expected %d",
                        i, adapter.name, len(raw.landmarks), LANDMARK_COUNT)
            continue
        if not all(math.isfinite(x) and math.isfinite(y) for x, y in raw.landmarks):
            log.warning("dropping face %d from %s: non-finite landmark", i, adapter.name)
            continue
        if not 0.0 <= raw.confidence <= 1.0:
            log.warning("dropping face %d from %s: confidence %r outside [0, 1]",
                        i, adapter.name, raw.confidence)
            continue
        if raw.yaw_degrees is not None and not -180.0 <= raw.yaw_degrees <= 180.0:
            log.warning("dropping face %d from %s: yaw %r outside [-180, 180]",
                        i, adapter.name, raw.yaw_degrees)
            continue
        faces.append(
            DetectedFace(
                landmarks=LandmarkSet.from_pairs(raw.landmarks),
                confidence=raw.confidence,
                yaw_degrees=raw.yaw_degrees,
                bbox_hint=raw.bbox_hint,
            )
        )
    return faces


def _face_warnings(pre_clamp_side: float, face: Optional[DetectedFace], settings: PrepSettings) -> tuple[str, ...]:
    warnings = []
    if pre_clamp_side < settings.small_face_side:
        warnings.append(WARN_SMALL_FACE)
    if face is not None:
        if face.yaw_degrees is not None and abs(face.yaw_degrees) > settings.extreme_pose_deg:
            warnings.append(WARN_EXTREME_POSE)
        if face.confidence < settings.low_confidence:
            warnings.append(WARN_LOW_CONFIDENCE)
    return tuple(warnings)


def prepare_regions(
    faces: Sequence[DetectedFace],
    panel_id: str,
    panel_width: int,
    panel_height: int,
    pad_frac: Optional[float] = None,
    settings: PrepSettings = PrepSettings(),
) -> tuple[list[PreparedRegion], list[PreparationFailure]]:
    """Turn validated detections into ordered crop regions.

    Regions are ordered by descending side, then reading order (origin_x,
    origin_y ascending); face_index follows that order.  Faces that cannot
    yield a croppable square are returned as failures, never raised and
    never silently dropped.
    """
    pad = settings.pad_frac if pad_frac is None else pad_frac
    prepared: list[tuple[CropSpec, tuple[str, ...]]] = []
    failures: list[PreparationFailure] = []
    for i, face in enumerate(faces):
        hull = None
        try:
            hull = tight_bbox(face.landmarks)
            padded = squarify_pad(hull, pad)
            square = clamp_square(padded, panel_width, panel_height)
            spec = make_crop_spec(panel_id, square, "auto")
        except PanelfaceError as exc:
            failures.append(PreparationFailure(input_index=i, code=exc.code, message=str(exc), hull=hull))
            continue
        prepared.append((spec, _face_warnings(padded.width, face, settings)))
    prepared.sort(key=lambda item: (-item[0].side, item[0].square.origin_x, item[0].square.origin_y))
    regions = [
        PreparedRegion(crop_spec=spec, origin="auto", warnings=warnings, face_index=idx)
        for idx, (spec, warnings) in enumerate(prepared)
    ]
    return regions, failures


def manual_frame(
    rect: BBox,
    panel_id: str,
    panel_width: int,
    panel_height: int,
    face_index: int = 0,
    settings: PrepSettings = PrepSettings(),
) -> PreparedRegion:
    """Squarify an artist-drawn rectangle into a region.

    side = max(w, h) with the rectangle's center preserved, then the usual
    clamp; the result is indistinguishable from an auto region except for
    the recorded origin.
    """
    side = float(round_half_away(max(rect.width, rect.height)))
    if side <= 0:
        raise SideTooSmall("drawn frame has zero extent")
    cx, cy = rect.center
    square = BBox(cx - side / 2.0, cy - side / 2.0, side, side)
    clamped = clamp_square(square, panel_width, panel_height)
    spec = make_crop_spec(panel_id, clamped, "manual")
    return PreparedRegion(
        crop_spec=spec,
        origin="manual",
        warnings=_face_warnings(side, None, settings),
        face_index=face_index,
    )
