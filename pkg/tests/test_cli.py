from __future__ import annotations

import json

import numpy as np
import pytest
from click.testing import CliRunner

from panelface.cli import main
from panelface.engines import read_stamp
from panelface.geometry import BBox, make_crop_spec
from panelface.raster import decode_png, encode_png, extract_crop, load_png, save_png

from conftest import make_frames, synth_panel, transformed_landmarks, write_face_doc


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def panel_file(tmp_path):
    panel = synth_panel(700, 640, 3, seed=91)
    path = tmp_path / "panel.png"
    path.write_bytes(encode_png(panel))
    return path


@pytest.fixture
def frames(tmp_path):
    directory = tmp_path / "frames"
    directory.mkdir()
    for i, frame in enumerate(make_frames(10)):
        save_png(frame, directory / f"f_{i:02d}.png")
    return directory


def mock_spec(tmp_path, faces):
    path = write_face_doc(tmp_path / "mock_faces.json", faces)
    return f"mock:{path}"


class TestDetect:
    def test_writes_regions_document(self, runner, tmp_path, panel_file):
        detector = mock_spec(
            tmp_path,
            [
                {"landmarks": transformed_landmarks(scale=1.1), "confidence": 0.9},
                {"landmarks": transformed_landmarks(scale=0.5, dx=200), "confidence": 0.8},
            ],
        )
        out = tmp_path / "regions.json"
        result = runner.invoke(
            main, ["detect", "--panel", str(panel_file), "--detector", detector, "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert len(doc["regions"]) == 2

    def test_no_faces_still_exits_zero(self, runner, tmp_path, panel_file):
        out = tmp_path / "regions.json"
        result = runner.invoke(
            main,
            ["detect", "--panel", str(panel_file), "--detector", mock_spec(tmp_path, []), "--out", str(out)],
        )
        assert result.exit_code == 0
        assert json.loads(out.read_text()) == {"regions": [], "failures": []}

    def test_unreadable_image(self, runner, tmp_path):
        bad = tmp_path / "bad.png"
        bad.write_bytes(b"garbage")
        result = runner.invoke(
            main,
            ["detect", "--panel", str(bad), "--detector", mock_spec(tmp_path, []), "--out", str(tmp_path / "o.json")],
        )
        assert result.exit_code == 5
        assert "UnreadableMedia" in result.stderr


class TestMap:
    def test_stamp_keyframe_encoded_in_output(self, runner, tmp_path, panel_file, frames):
        out = tmp_path / "crop.png"
        result = runner.invoke(
            main,
            [
                "map", "--panel", str(panel_file), "--rect", "30,40,512,512",
                "--frames-dir", str(frames), "--engine", "stamp",
                "--eye", "0.5", "--lip", "1.0", "--keyframe", "3", "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        assert read_stamp(load_png(out)) == (3, 128, 255)
        doc = json.loads(out.with_suffix(".json").read_text())
        face = doc["faces"][0]
        assert (face["x"], face["y"], face["side"]) == (30, 40, 512)
        assert face["provenance"]["frame_index"] == 3

    def test_identity_output_equals_extracted_crop(self, runner, tmp_path, panel_file, frames):
        out = tmp_path / "crop.png"
        result = runner.invoke(
            main,
            [
                "map", "--panel", str(panel_file), "--rect", "100,80,300,300",
                "--frames-dir", str(frames), "--engine", "identity",
                "--keyframe", "0", "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        panel = decode_png(panel_file.read_bytes())
        expected = extract_crop(panel, make_crop_spec("p", BBox(100, 80, 300, 300), "manual"))
        assert np.array_equal(load_png(out), expected)

    def test_keyframe_out_of_range(self, runner, tmp_path, panel_file, frames):
        result = runner.invoke(
            main,
            [
                "map", "--panel", str(panel_file), "--rect", "30,40,512,512",
                "--frames-dir", str(frames), "--keyframe", "99", "--out", str(tmp_path / "c.png"),
            ],
        )
        assert result.exit_code == 4
        assert "InvalidIndex" in result.stderr

    def test_auto_region_path(self, runner, tmp_path, panel_file, frames):
        detector = mock_spec(tmp_path, [{"landmarks": transformed_landmarks(), "confidence": 0.9}])
        out = tmp_path / "crop.png"
        result = runner.invoke(
            main,
            [
                "map", "--panel", str(panel_file), "--detector", detector,
                "--frames-dir", str(frames), "--engine", "stamp",
                "--keyframe", "1", "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        assert read_stamp(load_png(out))[0] == 1


class TestCompose:
    def map_identity(self, runner, tmp_path, panel_file, frames, rect="30,40,512,512"):
        out = tmp_path / "crop.png"
        result = runner.invoke(
            main,
            [
                "map", "--panel", str(panel_file), "--rect", rect,
                "--frames-dir", str(frames), "--engine", "identity",
                "--keyframe", "0", "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        return out.with_suffix(".json")

    def test_identity_512_round_trip_bytes(self, runner, tmp_path, panel_file, frames):
        doc = self.map_identity(runner, tmp_path, panel_file, frames)
        out = tmp_path / "composed.png"
        result = runner.invoke(
            main,
            ["compose", "--panel", str(panel_file), "--faces", str(doc), "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert out.read_bytes() == panel_file.read_bytes()

    def test_seam_report_flag_prints_metrics(self, runner, tmp_path, panel_file, frames):
        doc = self.map_identity(runner, tmp_path, panel_file, frames, rect="20,20,256,256")
        result = runner.invoke(
            main,
            [
                "compose", "--panel", str(panel_file), "--faces", str(doc),
                "--seam-report", "--out", str(tmp_path / "c.png"),
            ],
        )
        assert result.exit_code == 0, result.output
        report = json.loads(result.output[: result.output.rfind("}") + 1])
        assert "seams" in report and len(report["seams"]) == 1

    def test_mismatched_spec_fails(self, runner, tmp_path, panel_file, frames):
        doc_path = self.map_identity(runner, tmp_path, panel_file, frames)
        doc = json.loads(doc_path.read_text())
        doc["faces"][0]["x"] = 5000  # stale coordinates for this panel
        doc_path.write_text(json.dumps(doc))
        result = runner.invoke(
            main,
            ["compose", "--panel", str(panel_file), "--faces", str(doc_path), "--out", str(tmp_path / "c.png")],
        )
        assert result.exit_code == 4
        assert "SpecOutOfBounds" in result.stderr


class TestRoundtrip:
    def test_large_panel_round_trips(self, runner, panel_file):
        result = runner.invoke(main, ["roundtrip", "--panel", str(panel_file)])
        assert result.exit_code == 0, result.output
        assert "pixel-identical" in result.output

    def test_grayscale_panel_round_trips(self, runner, tmp_path):
        path = tmp_path / "gray.png"
        path.write_bytes(encode_png(synth_panel(640, 560, 1, seed=17)))
        result = runner.invoke(main, ["roundtrip", "--panel", str(path)])
        assert result.exit_code == 0, result.output

    def test_tiny_panel_fails_with_side_too_small(self, runner, tmp_path):
        path = tmp_path / "tiny.png"
        path.write_bytes(encode_png(synth_panel(128, 128, 3, seed=18)))
        result = runner.invoke(main, ["roundtrip", "--panel", str(path)])
        assert result.exit_code == 4
        assert "SideTooSmall" in result.stderr

    def test_corrupt_png_fails(self, runner, tmp_path):
        path = tmp_path / "corrupt.png"
        path.write_bytes(b"\x89PNG\r\n\x1a\nnope")
        result = runner.invoke(main, ["roundtrip", "--panel", str(path)])
        assert result.exit_code == 5

    def test_detector_centered_roundtrip(self, runner, tmp_path, panel_file):
        detector = mock_spec(tmp_path, [{"landmarks": transformed_landmarks(), "confidence": 0.9}])
        result = runner.invoke(
            main, ["roundtrip", "--panel", str(panel_file), "--detector", detector]
        )
        assert result.exit_code == 0, result.output
