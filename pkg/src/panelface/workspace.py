"""Stateful orchestration of one artist's project.

The workspace owns the in-memory images, regions, sessions, and committed
faces for a single project directory, and writes durable state through the
project store after every committing mutation.  Sessions are deliberately
ephemeral: a project records panels, prepared regions, committed faces, and
compositions, nothing else.

Region indices are workspace-allocated and monotonic per panel.  Re-running
auto-detection replaces the panel's previous auto regions (their indices are
retired); manual regions persist.
"""

from __future__ import annotations

import logging
import re
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .compose import ComposedPanel, compose
from .engines import EngineListing, EngineRegistry, MotionMode, RetargetParams
from .errors import AdapterUnavailable, InvalidSource, NotFound, SpecOutOfBounds
from .geometry import BBox, make_crop_spec
from .prepare import DetectorAdapter, PreparationFailure, PreparedRegion, detect_faces, manual_frame, prepare_regions
from .raster import decode_png, encode_png, is_canonical
from .session import DrivingPerformance, MappedFace, MappingSession, Provenance, SessionStatus, create_session
from .store import (
    CompositionRecord,
    MappedRecord,
    PanelRecord,
    Project,
    ProjectSettings,
    RegionRecord,
    load,
    project_to_manifest,
    read_asset,
    save,
    sha256_hex,
)

log = logging.getLogger(__name__)


def _next_numbered(prefix: str, existing: Sequence[str]) -> str:
    highest = 0
    for name in existing:
        m = re.fullmatch(rf"{re.escape(prefix)}-(\d+)", name)
        if m:
            highest = max(highest, int(m.group(1)))
    return f"{prefix}-{highest + 1:03d}"


class Workspace:
    def __init__(
        self,
        project_dir,
        detectors: Optional[dict[str, DetectorAdapter]] = None,
        engines: Optional[EngineRegistry] = None,
        settings: Optional[ProjectSettings] = None,
        autosave: bool = True,
    ) -> None:
        self.project_dir = Path(project_dir)
        self.detectors = detectors or {}
        self.engines = engines or EngineRegistry()
        self.autosave = autosave
        self._lock = threading.RLock()
        self._executor = ThreadPoolExecutor(max_workers=8, thread_name_prefix="panelface-gen")
        self._engine_gates: dict[str, threading.BoundedSemaphore] = {}

        self.panels: dict[str, PanelRecord] = {}
        self.regions: dict[tuple[str, int], PreparedRegion] = {}
        self.mapped: dict[str, MappedRecord] = {}
        self.compositions: dict[str, CompositionRecord] = {}
        self.sessions: dict[str, MappingSession] = {}
        self._assets: dict[str, bytes] = {}  # content hash -> PNG bytes
        self._images: dict[str, np.ndarray] = {}  # panel/mapped id -> decoded pixels

        if (self.project_dir / "manifest.json").exists():
            self._load_existing(settings)
        else:
            self.settings = settings or ProjectSettings()
            self.project_id = self.project_dir.name or "project"
            if autosave:
                self.save()

    def _load_existing(self, settings_override: Optional[ProjectSettings]) -> None:
        project = load(self.project_dir)
        self.project_id = project.project_id
        self.settings = settings_override or project.settings
        for panel in project.panels:
            data = read_asset(self.project_dir, panel.asset)
            self.panels[panel.panel_id] = panel
            self._assets[panel.asset] = data
            self._images[panel.panel_id] = decode_png(data)
        for region in project.regions:
            self.regions[(region.panel_id, region.face_index)] = PreparedRegion(
                crop_spec=region.crop_spec,
                origin=region.origin,
                warnings=region.warnings,
                face_index=region.face_index,
            )
        for record in project.mapped:
            data = read_asset(self.project_dir, record.asset)
            self.mapped[record.mapped_id] = record
            self._assets[record.asset] = data
            self._images[record.mapped_id] = decode_png(data)
        for record in project.compositions:
            self.compositions[record.composed_id] = record
            self._assets[record.asset] = read_asset(self.project_dir, record.asset)

    def close(self) -> None:
        self._executor.shutdown(wait=True)

    # -- persistence -------------------------------------------------------

    def project(self) -> Project:
        with self._lock:
            regions = sorted(self.regions.values(), key=lambda r: (r.crop_spec.panel_id, r.face_index))
            return Project(
                project_id=self.project_id,
                settings=self.settings,
                panels=tuple(self.panels[k] for k in sorted(self.panels)),
                regions=tuple(
                    RegionRecord(
                        face_index=r.face_index,
                        origin=r.origin,
                        warnings=tuple(r.warnings),
                        crop_spec=r.crop_spec,
                    )
                    for r in regions
                ),
                mapped=tuple(self.mapped[k] for k in sorted(self.mapped)),
                compositions=tuple(self.compositions[k] for k in sorted(self.compositions)),
            )

    def save(self) -> dict:
        with self._lock:
            return save(self.project(), self.project_dir, self._assets)

    def manifest(self) -> dict:
        return project_to_manifest(self.project())

    def _autosave(self) -> None:
        if self.autosave:
            self.save()

    # -- panels --------------------------------------------------------------

    def create_panel(self, png_bytes: bytes) -> PanelRecord:
        image = decode_png(png_bytes)
        with self._lock:
            panel_id = _next_numbered("panel", list(self.panels))
            digest = _store_asset(self._assets, png_bytes)
            record = PanelRecord(
                panel_id=panel_id,
                asset=digest,
                width=image.shape[1],
                height=image.shape[0],
                channels=1 if image.ndim == 2 else 3,
            )
            self.panels[panel_id] = record
            self._images[panel_id] = image
            self._autosave()
            return record

    def panel(self, panel_id: str) -> PanelRecord:
        record = self.panels.get(panel_id)
        if record is None:
            raise NotFound(f"panel {panel_id!r} does not exist")
        return record

    def panel_image(self, panel_id: str) -> np.ndarray:
        self.panel(panel_id)
        return self._images[panel_id]

    # -- stage 1 ---------------------------------------------------------------

    def auto_detect(
        self, panel_id: str, detector_name: str, pad_frac: Optional[float] = None
    ) -> tuple[list[PreparedRegion], list[PreparationFailure]]:
        record = self.panel(panel_id)
        adapter = self.detectors.get(detector_name)
        if adapter is None:
            raise AdapterUnavailable(f"no detector {detector_name!r} configured")
        faces = detect_faces(self._images[panel_id], adapter)
        with self._lock:
            regions, failures = prepare_regions(
                faces,
                panel_id,
                record.width,
                record.height,
                pad_frac=pad_frac,
                settings=self.settings.prep_settings(),
            )
            for key, region in list(self.regions.items()):
                if key[0] == panel_id and region.origin == "auto":
                    del self.regions[key]
            base = self._next_face_index(panel_id)
            rebased = [
                PreparedRegion(
                    crop_spec=r.crop_spec,
                    origin=r.origin,
                    warnings=r.warnings,
                    face_index=base + i,
                )
                for i, r in enumerate(regions)
            ]
            for region in rebased:
                self.regions[(panel_id, region.face_index)] = region
            self._autosave()
            return rebased, failures

    def _next_face_index(self, panel_id: str) -> int:
        taken = [idx for pid, idx in self.regions if pid == panel_id]
        return max(taken) + 1 if taken else 0

    def manual_region(self, panel_id: str, rect: BBox) -> PreparedRegion:
        record = self.panel(panel_id)
        with self._lock:
            region = manual_frame(
                rect,
                panel_id,
                record.width,
                record.height,
                face_index=self._next_face_index(panel_id),
                settings=self.settings.prep_settings(),
            )
            self.regions[(panel_id, region.face_index)] = region
            self._autosave()
            return region

    def regions_for(self, panel_id: str) -> list[PreparedRegion]:
        self.panel(panel_id)
        return sorted(
            (r for (pid, _), r in self.regions.items() if pid == panel_id),
            key=lambda r: r.face_index,
        )

    def region(self, panel_id: str, face_index: int) -> PreparedRegion:
        region = self.regions.get((panel_id, face_index))
        if region is None:
            raise NotFound(f"region ({panel_id!r}, {face_index}) does not exist")
        return region

    # -- stage 2 ---------------------------------------------------------------

    def list_engines(self) -> EngineListing:
        return self.engines.list_engines()

    def create_mapping(
        self,
        panel_id: str,
        face_index: int,
        performance: DrivingPerformance,
        engine_name: str,
        mode: MotionMode = MotionMode.RELATIVE,
    ) -> MappingSession:
        region = self.region(panel_id, face_index)
        engine = self.engines.get(engine_name)
        with self._lock:
            session_id = _next_numbered("session", list(self.sessions))
            session = create_session(
                session_id=session_id,
                crop_spec=region.crop_spec,
                panel=self._images[panel_id],
                performance=performance,
                engine=engine,
                mode=mode,
            )
            self.sessions[session_id] = session
            return session

    def session(self, session_id: str) -> MappingSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise NotFound(f"session {session_id!r} does not exist")
        return session

    def _engine_gate(self, engine_name: str, limit: int) -> threading.BoundedSemaphore:
        with self._lock:
            gate = self._engine_gates.get(engine_name)
            if gate is None:
                gate = threading.BoundedSemaphore(limit)
                self._engine_gates[engine_name] = gate
            return gate

    def request_frames(self, session_id: str, indices: Sequence[int]) -> list[Future]:
        """Queue background generation; indices are validated up front so an
        out-of-range request fails before any engine call."""
        session = self.session(session_id)
        session.status()  # cheap existence/lock sanity
        for i in indices:
            session._check_index(i)
        gate = self._engine_gate(
            session.engine.descriptor.name, session.engine.descriptor.max_concurrency
        )

        def run(index: int) -> None:
            with gate:
                try:
                    session.generate({index})
                except Exception:  # per-frame errors are recorded on the session
                    log.exception("background generation failed for %s[%d]", session_id, index)

        return [self._executor.submit(run, i) for i in sorted(set(indices))]

    def session_status(self, session_id: str) -> SessionStatus:
        return self.session(session_id).status()

    def frame_png(self, session_id: str, index: int) -> bytes:
        frame = self.session(session_id).frame(index)
        return encode_png(frame.image)

    def set_session_params(
        self, session_id: str, params: RetargetParams, mode: Optional[MotionMode] = None
    ) -> SessionStatus:
        session = self.session(session_id)
        session.set_params(params, mode)
        return session.status()

    def select_keyframe(self, session_id: str, index: int) -> SessionStatus:
        session = self.session(session_id)
        session.select_keyframe(index)
        return session.status()

    def commit_session(self, session_id: str) -> MappedRecord:
        session = self.session(session_id)
        face = session.commit()
        return self._store_mapped(face)

    def _store_mapped(self, face: MappedFace) -> MappedRecord:
        with self._lock:
            png = encode_png(face.image)
            digest = _store_asset(self._assets, png)
            mapped_id = _next_numbered("mapped", list(self.mapped))
            record = MappedRecord(
                mapped_id=mapped_id, asset=digest, crop_spec=face.crop_spec, provenance=face.provenance
            )
            self.mapped[mapped_id] = record
            self._images[mapped_id] = face.image
            self._autosave()
            return record

    def import_mapped(
        self, panel_id: str, square: BBox, png_bytes: bytes, provenance: Provenance
    ) -> MappedRecord:
        """Register an externally produced mapped face (the CLI's compose
        path); validated exactly like a committed one."""
        record = self.panel(panel_id)
        image = decode_png(png_bytes)
        if not is_canonical(image):
            raise InvalidSource(f"mapped crop must be 512x512x3, got {image.shape}")
        spec = make_crop_spec(panel_id, square, "manual")
        x, y, side = int(square.origin_x), int(square.origin_y), int(square.width)
        if x < 0 or y < 0 or x + side > record.width or y + side > record.height:
            raise SpecOutOfBounds(f"square ({x},{y},{side}) exceeds panel {record.width}x{record.height}")
        return self._store_mapped(MappedFace(crop_spec=spec, image=image, provenance=provenance))

    # -- stage 3 ---------------------------------------------------------------

    def compose_panel(
        self, panel_id: str, mapped_ids: Sequence[str], feather_width: int = 0
    ) -> tuple[CompositionRecord, ComposedPanel]:
        self.panel(panel_id)
        faces = []
        for mapped_id in mapped_ids:
            record = self.mapped.get(mapped_id)
            if record is None:
                raise NotFound(f"mapped face {mapped_id!r} does not exist")
            faces.append(
                MappedFace(
                    crop_spec=record.crop_spec,
                    image=self._images[mapped_id],
                    provenance=record.provenance,
                )
            )
        result = compose(self._images[panel_id], faces, feather_width=feather_width, panel_id=panel_id)
        with self._lock:
            png = encode_png(result.image)
            digest = _store_asset(self._assets, png)
            composed_id = _next_numbered("composed", list(self.compositions))
            record = CompositionRecord(
                composed_id=composed_id,
                panel_id=panel_id,
                asset=digest,
                feather_width=feather_width,
                seam_summary=tuple(face.band_mean_abs for face in result.seams.faces),
            )
            self.compositions[composed_id] = record
            self._autosave()
            return record, result

    # -- export ------------------------------------------------------------------

    def export_png(self, item_id: str) -> bytes:
        """PNG bytes for a panel (the original upload), mapped crop, or
        composed panel."""
        with self._lock:
            if item_id in self.panels:
                return self._assets[self.panels[item_id].asset]
            if item_id in self.mapped:
                return self._assets[self.mapped[item_id].asset]
            if item_id in self.compositions:
                return self._assets[self.compositions[item_id].asset]
        raise NotFound(f"no exportable item {item_id!r}")


def _store_asset(assets: dict[str, bytes], data: bytes) -> str:
    digest = sha256_hex(data)
    assets[digest] = data
    return digest
