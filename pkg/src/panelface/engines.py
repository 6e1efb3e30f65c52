"""Expression-mapping engine contract and engines.

The high-fidelity reenactment network lives behind ``ExternalProcessEngine``
as an opaque adapter.  Two built-ins exist purely so the whole pipeline can
be exercised without any ML dependency: ``identity`` passes the source
through untouched, and ``stamp`` watermarks a 16x16 block with the frame
index and quantized retarget parameters so routing and selection can be
verified bit-exactly end to end.
"""

from __future__ import annotations

import base64
import json
import logging
import shutil
import subprocess
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Protocol, Sequence

import numpy as np

from .errors import EngineFailure, EngineUnknown, InvalidSource, ParamOutOfRange
from .geometry import round_half_away
from .raster import decode_png, encode_png, ensure_image, is_canonical

log = logging.getLogger(__name__)

STAMP_BLOCK = 16
ENGINE_DEFAULT_BYTE = 128  # stamp byte when a retarget param is engine-default


class MotionMode(str, Enum):
    """How driving motion is applied: as deltas from the source pose or as
    absolute pose.  Neither is privileged; relative is the documented default."""

    RELATIVE = "relative"
    ABSOLUTE = "absolute"


@dataclass(frozen=True)
class RetargetParams:
    """Normalized eye/lip retargeting scalars; ``None`` means the engine's
    own default behavior (the slider's reset position)."""

    eye_openness: Optional[float] = None
    lip_openness: Optional[float] = None

    def __post_init__(self) -> None:
        for label, value in (("eye", self.eye_openness), ("lip", self.lip_openness)):
            if value is not None and not 0.0 <= value <= 1.0:
                raise ParamOutOfRange(f"{label} openness {value} outside [0, 1]")


@dataclass(frozen=True)
class EngineDescriptor:
    name: str
    deterministic: bool
    max_concurrency: int


@dataclass(frozen=True)
class ReenactedFrame:
    image: np.ndarray
    frame_index: int
    params_used: RetargetParams
    mode_used: MotionMode

    def matches(self, mode: MotionMode, params: RetargetParams) -> bool:
        return self.mode_used == mode and self.params_used == params


class Engine(Protocol):
    descriptor: EngineDescriptor

    def render(
        self,
        source: np.ndarray,
        driving: np.ndarray,
        frame_index: int,
        mode: MotionMode,
        params: RetargetParams,
    ) -> np.ndarray: ...


def _param_byte(value: Optional[float]) -> int:
    return ENGINE_DEFAULT_BYTE if value is None else round_half_away(value * 255.0)


class IdentityEngine:
    """Returns the source unchanged; the pipeline's integrity probe."""

    descriptor = EngineDescriptor(name="identity", deterministic=True, max_concurrency=8)

    def render(self, source, driving, frame_index, mode, params):
        return source.copy()


class StampEngine:
    """Copies the source and overwrites the top-left 16x16 block with
    (frame_index mod 256, eye byte, lip byte)."""

    descriptor = EngineDescriptor(name="stamp", deterministic=True, max_concurrency=8)

    def render(self, source, driving, frame_index, mode, params):
        out = source.copy()
        out[:STAMP_BLOCK, :STAMP_BLOCK] = (
            frame_index % 256,
            _param_byte(params.eye_openness),
            _param_byte(params.lip_openness),
        )
        return out


def read_stamp(image: np.ndarray, x: int = 0, y: int = 0) -> tuple[int, int, int]:
    """Decode a stamp block at (x, y); raises if the block is not uniform."""
    block = image[y : y + STAMP_BLOCK, x : x + STAMP_BLOCK]
    first = block[0, 0]
    if not np.all(block == first):
        raise ValueError("stamp block is not uniform")
    return int(first[0]), int(first[1]), int(first[2])


class ExternalProcessEngine:
    """Adapter around an out-of-process reenactment engine.

    One request per frame over a subprocess pipe: a single JSON document on
    stdin ``{source, driving: base64 PNG, mode, eye, lip}`` and one back on
    stdout ``{image: base64 PNG}`` or ``{error}``.  Calls time out after
    ``timeout_s`` and are retried once before surfacing EngineFailure.
    """

    def __init__(self, label: str, command: Sequence[str], timeout_s: float = 60.0):
        self.command = list(command)
        self.timeout_s = timeout_s
        self.descriptor = EngineDescriptor(
            name=f"external:{label}", deterministic=False, max_concurrency=1
        )

    def reachable(self) -> bool:
        exe = self.command[0] if self.command else ""
        return bool(shutil.which(exe))

    def _call(self, request: bytes) -> bytes:
        proc = subprocess.run(
            self.command, input=request, capture_output=True, timeout=self.timeout_s
        )
        if proc.returncode != 0:
            raise EngineFailure(
                f"{self.descriptor.name} exited {proc.returncode}: "
                f"{proc.stderr.decode(errors='replace')[:500]}"
            )
        return proc.stdout

    def render(self, source, driving, frame_index, mode, params):
        request = json.dumps(
            {
                "source": base64.b64encode(encode_png(source)).decode("ascii"),
                "driving": base64.b64encode(encode_png(driving)).decode("ascii"),
                "mode": mode.value,
                "eye": params.eye_openness,
                "lip": params.lip_openness,
            }
        ).encode("utf-8")
        last_error: Exception | None = None
        for attempt in range(2):
            try:
                raw = self._call(request)
                reply = json.loads(raw)
                if "error" in reply:
                    raise EngineFailure(f"{self.descriptor.name}: {reply['error']}")
                image = decode_png(base64.b64decode(reply["image"]))
                return np.ascontiguousarray(image)
            except (OSError, subprocess.TimeoutExpired, json.JSONDecodeError, KeyError, ValueError) as exc:
                last_error = exc
                log.warning("%s attempt %d failed: %s", self.descriptor.name, attempt + 1, exc)
        raise EngineFailure(f"{self.descriptor.name} failed after retry: {last_error}")


def reenact(
    engine: Engine,
    source: np.ndarray,
    driving: np.ndarray,
    frame_index: int,
    mode: MotionMode,
    params: RetargetParams,
) -> ReenactedFrame:
    """Render one driving frame onto a canonical source crop."""
    ensure_image(source)
    ensure_image(driving)
    if not is_canonical(source):
        raise InvalidSource(f"source must be 512x512x3, got {source.shape}")
    image = engine.render(source, driving, frame_index, mode, params)
    if not is_canonical(image):
        raise EngineFailure(f"{engine.descriptor.name} returned non-canonical {image.shape}")
    return ReenactedFrame(image=image, frame_index=frame_index, params_used=params, mode_used=mode)


@dataclass(frozen=True)
class EngineListing:
    engines: tuple[EngineDescriptor, ...]
    diagnostics: tuple[str, ...]


class EngineRegistry:
    """Built-in engines plus whatever externals the deployment configured."""

    def __init__(self) -> None:
        self._builtin: dict[str, Engine] = {
            "identity": IdentityEngine(),
            "stamp": StampEngine(),
        }
        self._external: dict[str, ExternalProcessEngine] = {}

    def register_external(self, label: str, command: Sequence[str], timeout_s: float = 60.0) -> None:
        engine = ExternalProcessEngine(label, command, timeout_s=timeout_s)
        self._external[engine.descriptor.name] = engine

    def get(self, name: str) -> Engine:
        if name in self._builtin:
            return self._builtin[name]
        if name in self._external:
            return self._external[name]
        raise EngineUnknown(f"no engine named {name!r}")

    def list_engines(self) -> EngineListing:
        descriptors = [e.descriptor for e in self._builtin.values()]
        diagnostics = []
        for name, engine in self._external.items():
            if engine.reachable():
                descriptors.append(engine.descriptor)
            else:
                diagnostics.append(f"{name} configured but unreachable ({engine.command[0]})")
        return EngineListing(engines=tuple(descriptors), diagnostics=tuple(diagnostics))
