"""Headless driver for the pipeline.

All pipeline commands are thin clients of the studio service: they spin up
an in-process service over a throwaway project directory and drive it
through the same wire contract the UI uses, so CLI artifacts are service
artifacts by construction.  ``serve`` runs the long-lived service itself.

Exit codes: 0 success, 1 mismatch/unexpected, 2 usage, then one code per
error family: 3 not-found, 4 geometry/validation, 5 media, 6 adapter or
engine, 7 session state, 8 store.
"""

from __future__ import annotations

import base64
import json
import shlex
import sys
import tempfile
from contextlib import contextmanager
from pathlib import Path

import click
import numpy as np

from .client import ServiceError, StudioClient, error_code
from .engines import EngineRegistry
from .errors import InvalidIndex, PanelfaceError, SideTooSmall, UnreadableMedia
from .prepare import make_detector
from .raster import decode_png, encode_png
from .workspace import Workspace

_EXIT_BY_CODE = {
    "NotFound": 3,
    "FrameNotGenerated": 3,
    "MissingManifest": 3,
    "DegenerateLandmarks": 4,
    "PanelTooSmall": 4,
    "SideTooSmall": 4,
    "SpecOutOfBounds": 4,
    "InvalidIndex": 4,
    "ParamOutOfRange": 4,
    "MismatchedPanel": 4,
    "EngineUnknown": 4,
    "UnreadableMedia": 5,
    "ZeroFrames": 5,
    "EmptyPerformance": 5,
    "AdapterUnavailable": 6,
    "AdapterProtocolError": 6,
    "EngineFailure": 6,
    "InvalidSource": 6,
    "NothingSelected": 7,
    "StaleSelection": 7,
    "SessionCommitted": 7,
    "IOFailure": 8,
    "IntegrityError": 8,
    "VersionUnsupported": 8,
}


def _fail(exc: Exception) -> "click.exceptions.Exit":
    code = error_code(exc)
    message = getattr(exc, "message", None) or str(exc)
    click.echo(f"{code}: {message}", err=True)
    sys.exit(_EXIT_BY_CODE.get(code, 1))


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UnreadableMedia(f"cannot read {path}: {exc}") from exc


def _parse_rect(value: str) -> tuple[float, float, float, float]:
    parts = value.split(",")
    if len(parts) != 4:
        raise click.BadParameter("expected --rect x,y,w,h")
    try:
        x, y, w, h = (float(p) for p in parts)
    except ValueError as exc:
        raise click.BadParameter(f"non-numeric rect component: {exc}")
    return x, y, w, h


@contextmanager
def _pipeline_client(detector_spec: str | None = None):
    """In-process service over a throwaway project directory."""
    with tempfile.TemporaryDirectory(prefix="panelface-cli-") as tmp:
        detectors = {}
        if detector_spec:
            detectors["cli"] = make_detector(detector_spec)
        workspace = Workspace(
            Path(tmp) / "project", detectors=detectors, engines=EngineRegistry(), autosave=False
        )
        client = StudioClient.in_process(workspace)
        try:
            yield client
        finally:
            client.close()
            workspace.close()


@click.group()
def main() -> None:
    """Expression workstation for manga panels."""


@main.command()
@click.option("--bind", default="127.0.0.1:8787", show_default=True, help="HOST:PORT to listen on.")
@click.option("--project-dir", required=True, type=click.Path(), help="Project directory (created if absent).")
@click.option("--detector", "detector_specs", multiple=True,
              help="NAME=SPEC detector registration, e.g. mock=mock:faces.json or insight=cmd:./detect.sh")
@click.option("--engine", "engine_specs", multiple=True,
              help="LABEL=COMMAND external reenactment engine registration.")
def serve(bind: str, project_dir: str, detector_specs: tuple[str, ...], engine_specs: tuple[str, ...]) -> None:
    """Run the studio service for the companion UI."""
    import uvicorn

    from .service import create_app

    host, _, port = bind.rpartition(":")
    detectors = {}
    for spec in detector_specs:
        name, _, rest = spec.partition("=")
        detectors[name] = make_detector(rest)
    engines = EngineRegistry()
    for spec in engine_specs:
        label, _, command = spec.partition("=")
        engines.register_external(label, shlex.split(command))
    workspace = Workspace(project_dir, detectors=detectors, engines=engines)
    uvicorn.run(create_app(workspace), host=host or "127.0.0.1", port=int(port or 8787))


@main.command()
@click.option("--panel", required=True, help="Panel PNG path.")
@click.option("--detector", required=True, help="Detector spec (mock:faces.json or cmd:...).")
@click.option("--pad", type=float, default=None, help="Padding fraction override.")
@click.option("--out", required=True, type=click.Path(), help="Regions document output path.")
def detect(panel: str, detector: str, pad: float | None, out: str) -> None:
    """Detect faces and write the prepared-regions document."""
    try:
        with _pipeline_client(detector) as client:
            info = client.create_panel(_read_bytes(panel))
            doc = client.detect(info["panel_id"], "cli", pad_frac=pad)
            Path(out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
            click.echo(f"{len(doc['regions'])} region(s), {len(doc['failures'])} failure(s) -> {out}")
    except (ServiceError, PanelfaceError) as exc:
        _fail(exc)


def _single_region(client: StudioClient, panel_id: str, rect: str | None,
                   region_index: int | None, pad: float | None) -> dict:
    if rect is not None:
        x, y, w, h = _parse_rect(rect)
        return client.manual_region(panel_id, x, y, w, h)
    regions = client.detect(panel_id, "cli", pad_frac=pad)["regions"]
    index = region_index or 0
    if index >= len(regions):
        raise InvalidIndex(f"region index {index} but only {len(regions)} region(s) detected")
    return regions[index]


@main.command(name="map")
@click.option("--panel", required=True, help="Panel PNG path.")
@click.option("--rect", default=None, help="Manual frame x,y,w,h (else auto-detect).")
@click.option("--region-index", type=int, default=None, help="Detected region to map (with --detector).")
@click.option("--detector", default=None, help="Detector spec when using auto regions.")
@click.option("--frames-dir", required=True, type=click.Path(), help="Driving frames directory (PNGs).")
@click.option("--engine", default="identity", show_default=True)
@click.option("--mode", type=click.Choice(["relative", "absolute"]), default="relative", show_default=True)
@click.option("--eye", type=float, default=None, help="Eye retargeting in [0,1].")
@click.option("--lip", type=float, default=None, help="Lip retargeting in [0,1].")
@click.option("--keyframe", type=int, required=True, help="Driving frame index to commit.")
@click.option("--pad", type=float, default=None)
@click.option("--out", required=True, type=click.Path(), help="Mapped crop PNG output path.")
def cmd_map(panel: str, rect: str | None, region_index: int | None, detector: str | None,
            frames_dir: str, engine: str, mode: str, eye: float | None, lip: float | None,
            keyframe: int, pad: float | None, out: str) -> None:
    """Map one expression non-interactively and write the crop + spec doc."""
    if rect is None and detector is None:
        raise click.UsageError("provide --rect or --detector")
    try:
        with _pipeline_client(detector) as client:
            info = client.create_panel(_read_bytes(panel))
            region = _single_region(client, info["panel_id"], rect, region_index, pad)
            session = client.create_session(
                info["panel_id"], region["face_index"], engine, mode=mode,
                frames_dir=str(Path(frames_dir).resolve()),
            )
            sid = session["session_id"]
            client.request_frames(sid, [keyframe])
            client.wait_for_frames(sid, [keyframe])
            client.select_keyframe(sid, keyframe)
            if eye is not None or lip is not None:
                client.set_params(sid, eye=eye, lip=lip)
            mapped = client.commit(sid)
            crop = client.export(mapped["mapped_id"])
            out_path = Path(out)
            out_path.write_bytes(crop)
            doc = {
                "faces": [
                    {
                        "image": out_path.name,
                        "x": mapped["square"]["x"],
                        "y": mapped["square"]["y"],
                        "side": mapped["square"]["side"],
                        "provenance": mapped["provenance"],
                    }
                ]
            }
            sidecar = out_path.with_suffix(".json")
            sidecar.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
            click.echo(f"mapped crop -> {out_path}, spec doc -> {sidecar}")
    except (ServiceError, PanelfaceError, TimeoutError) as exc:
        _fail(exc)


@main.command()
@click.option("--panel", required=True, help="Panel PNG path.")
@click.option("--faces", "faces_docs", multiple=True, required=True,
              help="Mapped crops + specs document (from `map`); repeatable.")
@click.option("--feather", type=int, default=0, show_default=True)
@click.option("--seam-report", is_flag=True, help="Print seam metrics to stdout.")
@click.option("--out", required=True, type=click.Path(), help="Composed panel PNG output path.")
def compose(panel: str, faces_docs: tuple[str, ...], feather: int, seam_report: bool, out: str) -> None:
    """Paste mapped faces back at their recorded coordinates."""
    try:
        with _pipeline_client() as client:
            info = client.create_panel(_read_bytes(panel))
            mapped_ids = []
            for doc_path in faces_docs:
                doc_dir = Path(doc_path).parent
                doc = json.loads(_read_bytes(doc_path))
                for face in doc["faces"]:
                    image_bytes = _read_bytes(str(doc_dir / face["image"]))
                    record = client.import_mapped(
                        info["panel_id"],
                        face["x"], face["y"], face["side"],
                        base64.b64encode(image_bytes).decode("ascii"),
                        face["provenance"],
                    )
                    mapped_ids.append(record["mapped_id"])
            result = client.compose(info["panel_id"], mapped_ids, feather_width=feather)
            Path(out).write_bytes(client.export(result["composed_id"]))
            for warning in result["warnings"]:
                click.echo(f"warning: {warning}", err=True)
            if seam_report:
                click.echo(json.dumps({"seams": result["seams"]}, indent=2))
            click.echo(f"composed panel -> {out}")
    except (ServiceError, PanelfaceError, KeyError, json.JSONDecodeError) as exc:
        _fail(exc)


@main.command()
@click.option("--panel", required=True, help="Panel PNG path.")
@click.option("--detector", default=None, help="Optional detector spec; centers the probe on the first face.")
@click.option("--pad", type=float, default=None)
def roundtrip(panel: str, detector: str | None, pad: float | None) -> None:
    """One-shot integrity check: frame a 512 square, identity-map it,
    compose, and verify the panel is pixel-identical."""
    try:
        with _pipeline_client(detector) as client:
            original = _read_bytes(panel)
            info = client.create_panel(original)
            width, height = info["width"], info["height"]
            if min(width, height) < 512:
                raise SideTooSmall(f"panel {width}x{height} cannot hold a 512 square")
            cx, cy = width / 2, height / 2
            if detector is not None:
                regions = client.detect(info["panel_id"], "cli", pad_frac=pad)["regions"]
                if regions:
                    square = regions[0]["square"]
                    cx = square["x"] + square["side"] / 2
                    cy = square["y"] + square["side"] / 2
            region = client.manual_region(info["panel_id"], cx - 256, cy - 256, 512, 512)
            driving = base64.b64encode(encode_png(np.zeros((8, 8), dtype=np.uint8))).decode("ascii")
            session = client.create_session(
                info["panel_id"], region["face_index"], "identity", frames_b64=[driving]
            )
            sid = session["session_id"]
            client.request_frames(sid, [0])
            client.wait_for_frames(sid, [0])
            client.select_keyframe(sid, 0)
            mapped = client.commit(sid)
            result = client.compose(info["panel_id"], [mapped["mapped_id"]], feather_width=0)
            composed = client.export(result["composed_id"])
            if np.array_equal(decode_png(composed), decode_png(original)):
                click.echo("roundtrip OK: composed panel is pixel-identical")
            else:
                click.echo("roundtrip FAILED: composed panel differs from source", err=True)
                sys.exit(1)
    except (ServiceError, PanelfaceError, TimeoutError) as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
