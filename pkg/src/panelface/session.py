"""Stage 2: the interactive expression-mapping session.

A session binds one prepared region to one driving performance and one
engine.  Frames are reenacted on demand and cached; the artist scrubs the
results, picks the keyframe that reads best (which is often a few frames
away from the apparent best driving frame), refines the eye/lip sliders,
and commits.  A committed session is immutable.

Cache rule: a cached frame counts as available only while its (mode,
params) equal the session's current ones; parameter changes regenerate the
selected frame eagerly and everything else lazily on the next request.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .engines import Engine, MotionMode, ReenactedFrame, RetargetParams, reenact
from .errors import (
    EmptyPerformance,
    EngineFailure,
    FrameNotGenerated,
    InvalidIndex,
    NothingSelected,
    SessionCommitted,
    StaleSelection,
    UnreadableMedia,
    ZeroFrames,
)
from .geometry import CropSpec
from .raster import ensure_image, extract_crop, load_png

STATE_CREATED = "created"
STATE_GENERATING = "generating"
STATE_BROWSABLE = "browsable"
STATE_COMMITTED = "committed"

DECIMATION_THRESHOLD = 300  # performances longer than this default to keep-every-2


@dataclass(frozen=True)
class DrivingPerformance:
    """An ordered stack of driving frames (video or image sequence)."""

    frames: tuple[np.ndarray, ...]
    fps_hint: Optional[float] = None
    source_label: str = ""

    def __post_init__(self) -> None:
        if len(self.frames) == 0:
            raise EmptyPerformance("driving performance has no frames")
        shapes = {f.shape for f in self.frames}
        if len(shapes) > 1:
            raise UnreadableMedia(f"driving frames disagree on dimensions: {sorted(shapes)}")
        for f in self.frames:
            ensure_image(f)

    def __len__(self) -> int:
        return len(self.frames)


def _decode_video(path: Path) -> tuple[list[np.ndarray], Optional[float]]:
    try:
        import cv2
    except ImportError as exc:
        raise UnreadableMedia("video decoding requires the opencv extra; use a PNG directory") from exc
    cap = cv2.VideoCapture(str(path))
    if not cap.isOpened():
        raise UnreadableMedia(f"cannot open video {path}")
    fps = cap.get(cv2.CAP_PROP_FPS) or None
    frames: list[np.ndarray] = []
    while True:
        ok, frame = cap.read()
        if not ok:
            break
        frames.append(np.ascontiguousarray(frame[:, :, ::-1]))
    cap.release()
    return frames, fps


def ingest_performance(source, keep_every: Optional[int] = None) -> DrivingPerformance:
    """Load a driving performance from a PNG directory (filename-sorted) or
    a video file, decimating to every k-th frame.

    When ``keep_every`` is omitted, performances longer than 300 frames are
    decimated by 2 to keep engine budgets tractable.
    """
    if keep_every is not None and keep_every < 1:
        raise ValueError(f"keep_every must be >= 1, got {keep_every}")
    path = Path(source)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".png")
        if not files:
            raise ZeroFrames(f"no PNG frames in {path}")
        frames = [load_png(p) for p in files]
        fps = None
    elif path.is_file():
        frames, fps = _decode_video(path)
        if not frames:
            raise ZeroFrames(f"no decodable frames in {path}")
    else:
        raise UnreadableMedia(f"{source} is neither a file nor a directory")
    k = keep_every if keep_every is not None else (2 if len(frames) > DECIMATION_THRESHOLD else 1)
    return DrivingPerformance(frames=tuple(frames[::k]), fps_hint=fps, source_label=str(source))


@dataclass(frozen=True)
class Provenance:
    engine: str
    frame_index: int
    mode: MotionMode
    params: RetargetParams


@dataclass(frozen=True)
class MappedFace:
    """A committed reenacted crop, ready for Stage 3 composition."""

    crop_spec: CropSpec
    image: np.ndarray
    provenance: Provenance


@dataclass
class SessionStatus:
    state: str
    frame_count: int
    available_indices: list[int]
    selected_index: Optional[int]
    mode: MotionMode
    params: RetargetParams
    frame_errors: dict[int, str] = field(default_factory=dict)


class MappingSession:
    """State machine: created -> generating -> browsable -> committed.

    Mutations are serialized by an internal lock (one writer per session);
    reads hand out snapshots.  Engine renders happen sequentially inside the
    mutating call; callers wanting parallel generation submit per-frame
    batches from their own workers (see the service layer).
    """

    def __init__(
        self,
        session_id: str,
        crop_spec: CropSpec,
        source_crop: np.ndarray,
        performance: DrivingPerformance,
        engine: Engine,
        mode: MotionMode = MotionMode.RELATIVE,
    ) -> None:
        self.session_id = session_id
        self.crop_spec = crop_spec
        self.source_crop = source_crop
        self.performance = performance
        self.engine = engine
        self.mode = mode
        self.params = RetargetParams()
        self.results: dict[int, ReenactedFrame] = {}
        self.selected_index: Optional[int] = None
        self.frame_errors: dict[int, str] = {}
        self.engine_calls = 0
        self._committed = False
        self._started = False
        self._lock = threading.RLock()

    # -- state -----------------------------------------------------------

    @property
    def state(self) -> str:
        if self._committed:
            return STATE_COMMITTED
        if self.results:
            return STATE_BROWSABLE
        if self._started:
            return STATE_GENERATING
        return STATE_CREATED

    def _require_mutable(self) -> None:
        if self._committed:
            raise SessionCommitted(f"session {self.session_id} is committed and immutable")

    def _is_available(self, index: int) -> bool:
        frame = self.results.get(index)
        return frame is not None and frame.matches(self.mode, self.params)

    def available_indices(self) -> list[int]:
        with self._lock:
            return sorted(i for i in self.results if self._is_available(i))

    def status(self) -> SessionStatus:
        with self._lock:
            return SessionStatus(
                state=self.state,
                frame_count=len(self.performance),
                available_indices=sorted(i for i in self.results if self._is_available(i)),
                selected_index=self.selected_index,
                mode=self.mode,
                params=self.params,
                frame_errors=dict(self.frame_errors),
            )

    def frame(self, index: int) -> ReenactedFrame:
        """Read an available result; never regenerates or mutates."""
        with self._lock:
            self._check_index(index)
            if not self._is_available(index):
                raise FrameNotGenerated(f"frame {index} has no up-to-date result")
            return self.results[index]

    def _check_index(self, index: int) -> None:
        if not isinstance(index, (int, np.integer)) or not 0 <= index < len(self.performance):
            raise InvalidIndex(f"frame index {index} outside [0, {len(self.performance)})")

    # -- mutations -------------------------------------------------------

    def _render(self, index: int, mode: MotionMode, params: RetargetParams) -> bool:
        """Render one frame with the given settings; returns success."""
        try:
            frame = reenact(self.engine, self.source_crop, self.performance.frames[index], index, mode, params)
            self.engine_calls += 1
        except EngineFailure as exc:
            self.frame_errors[index] = str(exc)
            return False
        self.results[index] = frame
        self.frame_errors.pop(index, None)
        return True

    def generate(self, indices: Iterable[int]) -> list[int]:
        """Reenact the requested frames with the current (mode, params).

        Frames already cached under the current settings are not recomputed.
        Per-frame engine failures are recorded without aborting the batch.
        Returns the indices actually (re)rendered.
        """
        with self._lock:
            self._require_mutable()
            wanted = sorted(set(indices))
            for i in wanted:
                self._check_index(i)
            self._started = True
            rendered = []
            for i in wanted:
                if self._is_available(i):
                    continue
                if self._render(i, self.mode, self.params):
                    rendered.append(i)
            return rendered

    def select_keyframe(self, index: int) -> None:
        with self._lock:
            self._require_mutable()
            self._check_index(index)
            if index not in self.results:
                raise FrameNotGenerated(f"frame {index} not generated yet")
            self.selected_index = index

    def set_params(self, params: RetargetParams, mode: Optional[MotionMode] = None) -> None:
        """Update retarget params and/or motion mode.

        A call that changes nothing is a no-op.  On change, every cached
        result generated under other settings becomes stale; the selected
        frame (if any) is regenerated eagerly, the rest lazily on the next
        generate request.
        """
        with self._lock:
            self._require_mutable()
            new_mode = self.mode if mode is None else mode
            if params == self.params and new_mode == self.mode:
                return
            self.params = params
            self.mode = new_mode
            if self.selected_index is not None and not self._is_available(self.selected_index):
                self._render(self.selected_index, self.mode, self.params)

    def commit(self) -> MappedFace:
        """Freeze the session and hand the selected frame to Stage 3."""
        with self._lock:
            self._require_mutable()
            if self.selected_index is None:
                raise NothingSelected("no keyframe selected")
            frame = self.results.get(self.selected_index)
            if frame is None or not frame.matches(self.mode, self.params):
                raise StaleSelection(f"frame {self.selected_index} was generated with outdated settings")
            self._committed = True
            return MappedFace(
                crop_spec=self.crop_spec,
                image=frame.image.copy(),
                provenance=Provenance(
                    engine=self.engine.descriptor.name,
                    frame_index=self.selected_index,
                    mode=self.mode,
                    params=self.params,
                ),
            )


def create_session(
    session_id: str,
    crop_spec: CropSpec,
    panel: np.ndarray,
    performance: DrivingPerformance,
    engine: Engine,
    mode: MotionMode = MotionMode.RELATIVE,
) -> MappingSession:
    """Open a mapping session for one prepared region of a panel."""
    source_crop = extract_crop(panel, crop_spec)
    return MappingSession(
        session_id=session_id,
        crop_spec=crop_spec,
        source_crop=source_crop,
        performance=performance,
        engine=engine,
        mode=mode,
    )
