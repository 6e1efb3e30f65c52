"""Durable project persistence.

A project directory holds a human-readable ``manifest.json`` and an
``assets/`` directory of PNGs named by their SHA-256 content hash.  The
manifest is written last, atomically via rename, so concurrent readers only
ever see completed saves.  Everything needed to re-run composition lives
here; nothing hides in process state.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping

from .engines import MotionMode, RetargetParams
from .errors import IntegrityError, IOFailure, MissingManifest, VersionUnsupported
from .geometry import BBox, CropSpec, MIN_SIDE
from .prepare import PrepSettings
from .session import Provenance

SCHEMA_VERSION = 1


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def asset_path(directory, digest: str) -> Path:
    return Path(directory) / "assets" / f"{digest}.png"


@dataclass(frozen=True)
class ProjectSettings:
    pad_frac: float = PrepSettings().pad_frac
    min_side: int = MIN_SIDE
    small_face_side: float = PrepSettings().small_face_side
    extreme_pose_deg: float = PrepSettings().extreme_pose_deg
    low_confidence: float = PrepSettings().low_confidence

    def prep_settings(self) -> PrepSettings:
        return PrepSettings(
            pad_frac=self.pad_frac,
            small_face_side=self.small_face_side,
            extreme_pose_deg=self.extreme_pose_deg,
            low_confidence=self.low_confidence,
        )


@dataclass(frozen=True)
class PanelRecord:
    panel_id: str
    asset: str  # sha256 of the original PNG bytes
    width: int
    height: int
    channels: int


@dataclass(frozen=True)
class RegionRecord:
    face_index: int
    origin: str
    warnings: tuple[str, ...]
    crop_spec: CropSpec

    @property
    def panel_id(self) -> str:
        return self.crop_spec.panel_id


@dataclass(frozen=True)
class MappedRecord:
    mapped_id: str
    asset: str
    crop_spec: CropSpec
    provenance: Provenance


@dataclass(frozen=True)
class CompositionRecord:
    composed_id: str
    panel_id: str
    asset: str
    feather_width: int
    seam_summary: tuple[tuple[float, ...], ...]  # per face: mean abs diff per channel


@dataclass(frozen=True)
class Project:
    project_id: str
    settings: ProjectSettings
    panels: tuple[PanelRecord, ...] = ()
    regions: tuple[RegionRecord, ...] = ()
    mapped: tuple[MappedRecord, ...] = ()
    compositions: tuple[CompositionRecord, ...] = ()

    def referenced_assets(self) -> list[str]:
        return (
            [p.asset for p in self.panels]
            + [m.asset for m in self.mapped]
            + [c.asset for c in self.compositions]
        )


def _crop_spec_to_json(spec: CropSpec) -> dict:
    return {
        "panel_id": spec.panel_id,
        "x": int(spec.square.origin_x),
        "y": int(spec.square.origin_y),
        "side": spec.side,
        "source": spec.source,
        "canonical_size": spec.canonical_size,
    }


def _crop_spec_from_json(doc: dict) -> CropSpec:
    side = float(doc["side"])
    return CropSpec(
        panel_id=doc["panel_id"],
        square=BBox(float(doc["x"]), float(doc["y"]), side, side),
        source=doc["source"],
        canonical_size=int(doc["canonical_size"]),
    )


def _provenance_to_json(prov: Provenance) -> dict:
    return {
        "engine": prov.engine,
        "frame_index": prov.frame_index,
        "mode": prov.mode.value,
        "eye": prov.params.eye_openness,
        "lip": prov.params.lip_openness,
    }


def _provenance_from_json(doc: dict) -> Provenance:
    return Provenance(
        engine=doc["engine"],
        frame_index=int(doc["frame_index"]),
        mode=MotionMode(doc["mode"]),
        params=RetargetParams(eye_openness=doc["eye"], lip_openness=doc["lip"]),
    )


def project_to_manifest(project: Project) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "project_id": project.project_id,
        "settings": asdict(project.settings),
        "panels": [asdict(p) for p in project.panels],
        "regions": [
            {
                "face_index": r.face_index,
                "origin": r.origin,
                "warnings": list(r.warnings),
                "crop_spec": _crop_spec_to_json(r.crop_spec),
            }
            for r in project.regions
        ],
        "mapped": [
            {
                "mapped_id": m.mapped_id,
                "asset": m.asset,
                "crop_spec": _crop_spec_to_json(m.crop_spec),
                "provenance": _provenance_to_json(m.provenance),
            }
            for m in project.mapped
        ],
        "compositions": [
            {
                "composed_id": c.composed_id,
                "panel_id": c.panel_id,
                "asset": c.asset,
                "feather_width": c.feather_width,
                "seam_summary": [list(face) for face in c.seam_summary],
            }
            for c in project.compositions
        ],
    }


def project_from_manifest(doc: dict) -> Project:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise VersionUnsupported(f"manifest schema_version {version!r}; this build reads {SCHEMA_VERSION}")
    try:
        project = Project(
            project_id=doc["project_id"],
            settings=ProjectSettings(**doc["settings"]),
            panels=tuple(PanelRecord(**p) for p in doc["panels"]),
            regions=tuple(
                RegionRecord(
                    face_index=int(r["face_index"]),
                    origin=r["origin"],
                    warnings=tuple(r["warnings"]),
                    crop_spec=_crop_spec_from_json(r["crop_spec"]),
                )
                for r in doc["regions"]
            ),
            mapped=tuple(
                MappedRecord(
                    mapped_id=m["mapped_id"],
                    asset=m["asset"],
                    crop_spec=_crop_spec_from_json(m["crop_spec"]),
                    provenance=_provenance_from_json(m["provenance"]),
                )
                for m in doc["mapped"]
            ),
            compositions=tuple(
                CompositionRecord(
                    composed_id=c["composed_id"],
                    panel_id=c["panel_id"],
                    asset=c["asset"],
                    feather_width=int(c["feather_width"]),
                    seam_summary=tuple(tuple(float(v) for v in face) for face in c["seam_summary"]),
                )
                for c in doc["compositions"]
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise IntegrityError(f"manifest is structurally invalid: {exc}") from exc
    keys = [(r.panel_id, r.face_index) for r in project.regions]
    if len(keys) != len(set(keys)):
        raise IntegrityError("duplicate (panel_id, face_index) in regions")
    return project


def save(project: Project, directory, assets: Mapping[str, bytes]) -> dict:
    """Write manifest + assets; returns the manifest document.

    ``assets`` maps content hash to PNG bytes for every referenced asset.
    Content-addressed files are only written when absent, so an unchanged
    re-save leaves identical bytes on disk.
    """
    directory = Path(directory)
    manifest = project_to_manifest(project)
    try:
        (directory / "assets").mkdir(parents=True, exist_ok=True)
        for digest in project.referenced_assets():
            if digest not in assets:
                raise IntegrityError(f"no bytes provided for asset {digest}")
            if sha256_hex(assets[digest]) != digest:
                raise IntegrityError(f"asset bytes do not match hash {digest}")
            target = asset_path(directory, digest)
            if not target.exists():
                target.write_bytes(assets[digest])
        payload = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        tmp = directory / "manifest.json.tmp"
        tmp.write_text(payload, encoding="utf-8")
        os.replace(tmp, directory / "manifest.json")
    except OSError as exc:
        raise IOFailure(f"cannot write project to {directory}: {exc}") from exc
    return manifest


def load(directory) -> Project:
    """Read and verify a project; every referenced asset must exist and
    hash-match its manifest entry."""
    directory = Path(directory)
    manifest_file = directory / "manifest.json"
    if not manifest_file.exists():
        raise MissingManifest(f"no manifest.json in {directory}")
    try:
        doc = json.loads(manifest_file.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise IntegrityError(f"manifest unreadable: {exc}") from exc
    project = project_from_manifest(doc)
    for digest in project.referenced_assets():
        target = asset_path(directory, digest)
        if not target.exists():
            raise IntegrityError(f"asset {digest} missing from {directory}")
        if sha256_hex(target.read_bytes()) != digest:
            raise IntegrityError(f"asset {digest} content does not match its hash")
    return project


def read_asset(directory, digest: str) -> bytes:
    """Read one verified asset from a project directory."""
    target = asset_path(directory, digest)
    if not target.exists():
        raise IntegrityError(f"asset {digest} missing from {directory}")
    data = target.read_bytes()
    if sha256_hex(data) != digest:
        raise IntegrityError(f"asset {digest} content does not match its hash")
    return data
