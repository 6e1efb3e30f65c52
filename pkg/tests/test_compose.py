from __future__ import annotations

import numpy as np
import pytest

from panelface.compose import compose, seam_metrics
from panelface.engines import MotionMode, RetargetParams, StampEngine
from panelface.errors import MismatchedPanel, SpecOutOfBounds
from panelface.geometry import BBox, make_crop_spec
from panelface.raster import extract_crop
from panelface.session import MappedFace, Provenance

from conftest import synth_panel
from oracles import reference_resize_bilinear


def spec_at(x, y, side, panel_id="p"):
    return make_crop_spec(panel_id, BBox(x, y, side, side), "auto")


def identity_face(panel, spec):
    return MappedFace(
        crop_spec=spec,
        image=extract_crop(panel, spec),
        provenance=Provenance("identity", 0, MotionMode.RELATIVE, RetargetParams()),
    )


def stamp_face(panel, spec, index=3, eye=0.5, lip=1.0):
    params = RetargetParams(eye_openness=eye, lip_openness=lip)
    image = StampEngine().render(extract_crop(panel, spec), None, index, MotionMode.RELATIVE, params)
    return MappedFace(crop_spec=spec, image=image, provenance=Provenance("stamp", index, MotionMode.RELATIVE, params))


class TestCompose:
    def test_identity_512_round_trip_is_bit_exact(self):
        panel = synth_panel(700, 640, 3, seed=61)
        spec = spec_at(30, 40, 512, panel_id="p")
        result = compose(panel, [identity_face(panel, spec)], feather_width=0, panel_id="p")
        assert np.array_equal(result.image, panel)

    def test_identity_512_round_trip_grayscale(self):
        panel = synth_panel(640, 560, 1, seed=62)
        spec = spec_at(5, 7, 512)
        result = compose(panel, [identity_face(panel, spec)])
        assert result.image.ndim == 2
        assert np.array_equal(result.image, panel)

    def test_identity_resampled_round_trip_stays_close(self, panel_color):
        spec = spec_at(100, 80, 256)
        result = compose(panel_color, [identity_face(panel_color, spec)])
        outside = np.ones(panel_color.shape[:2], dtype=bool)
        outside[80 : 80 + 256, 100 : 100 + 256] = False
        assert np.array_equal(result.image[outside], panel_color[outside])
        inside_diff = np.abs(
            result.image[80:336, 100:356].astype(int) - panel_color[80:336, 100:356].astype(int)
        )
        assert inside_diff.mean(axis=(0, 1)).max() <= 2.0

    def test_resampled_paste_matches_reference_round_trip(self, panel_color):
        spec = spec_at(100, 80, 256)
        result = compose(panel_color, [identity_face(panel_color, spec)])
        region = panel_color[80:336, 100:356]
        expected = reference_resize_bilinear(reference_resize_bilinear(region, 512, 512), 256, 256)
        diff = np.abs(result.image[80:336, 100:356].astype(int) - expected.astype(int))
        assert diff.max() <= 2  # one rounding step per resample

    def test_overlap_warning_and_later_face_wins(self, panel_color):
        spec_a = spec_at(50, 50, 128)
        spec_b = spec_at(100, 100, 128)
        face_a = identity_face(panel_color, spec_a)
        face_b = stamp_face(panel_color, spec_b, index=9)
        result = compose(panel_color, [face_a, face_b])
        assert len(result.warnings) == 1
        assert "face 1 overlaps face 0" in result.warnings[0]
        from panelface.raster import resize_bilinear

        expected_b = resize_bilinear(face_b.image, 128, 128)
        assert np.array_equal(result.image[100:228, 100:228], expected_b)

    def test_mismatched_panel_rejected(self, panel_color):
        face = identity_face(panel_color, spec_at(0, 0, 128, panel_id="other"))
        with pytest.raises(MismatchedPanel):
            compose(panel_color, [face], panel_id="p")

    def test_out_of_bounds_spec_rejected(self):
        small = synth_panel(200, 200, 3, seed=2)
        big = synth_panel(700, 700, 3, seed=3)
        face = identity_face(big, spec_at(100, 100, 512))
        with pytest.raises(SpecOutOfBounds):
            compose(small, [face])

    def test_dimensions_always_preserved(self, panel_gray, panel_color):
        for panel in (panel_gray, panel_color):
            spec = spec_at(10, 10, 128)
            result = compose(panel, [identity_face(panel, spec)], feather_width=3)
            assert result.image.shape == panel.shape


class TestFeather:
    def test_outside_purity_for_any_feather(self, panel_color):
        spec = spec_at(64, 64, 200)
        face = stamp_face(panel_color, spec, index=5)
        for feather in (0, 1, 4, 16):
            result = compose(panel_color, [face], feather_width=feather)
            outside = np.ones(panel_color.shape[:2], dtype=bool)
            outside[64:264, 64:264] = False
            assert np.array_equal(result.image[outside], panel_color[outside])

    def test_blend_rises_monotonically_to_one(self):
        panel = np.zeros((300, 300, 3), dtype=np.uint8)
        spec = spec_at(50, 50, 128)
        face = MappedFace(
            crop_spec=spec,
            image=np.full((512, 512, 3), 200, dtype=np.uint8),
            provenance=Provenance("identity", 0, MotionMode.RELATIVE, RetargetParams()),
        )
        width = 8
        result = compose(panel, [face], feather_width=width)
        row = result.image[50 + 64, 50 : 50 + 64, 0].astype(int)  # edge to center
        assert all(b >= a for a, b in zip(row, row[1:]))
        assert row[0] == 0  # outermost ring is pure panel
        assert all(v == 200 for v in row[width:])

    def test_feather_zero_is_hard_paste(self):
        panel = np.zeros((300, 300, 3), dtype=np.uint8)
        spec = spec_at(50, 50, 128)
        face = MappedFace(
            crop_spec=spec,
            image=np.full((512, 512, 3), 200, dtype=np.uint8),
            provenance=Provenance("identity", 0, MotionMode.RELATIVE, RetargetParams()),
        )
        result = compose(panel, [face], feather_width=0)
        assert np.all(result.image[50:178, 50:178] == 200)


class TestSeamMetrics:
    def test_identity_512_has_zero_seams(self):
        panel_color = synth_panel(700, 640, 3, seed=63)
        spec = spec_at(30, 40, 512)
        faces = [identity_face(panel_color, spec)]
        result = compose(panel_color, faces)
        report = seam_metrics(panel_color, result.image, faces)
        face_seam = report.faces[0]
        assert face_seam.inner_mean_abs == (0.0, 0.0, 0.0)
        assert face_seam.outer_mean_abs == (0.0, 0.0, 0.0)
        assert face_seam.band_max_abs == 0

    def test_stamp_differences_confined_to_stamp_block(self):
        panel_color = synth_panel(700, 640, 3, seed=64)
        spec = spec_at(60, 70, 512)
        faces = [stamp_face(panel_color, spec, index=1)]
        result = compose(panel_color, faces)
        diff = np.abs(result.image.astype(int) - panel_color.astype(int)).sum(axis=2)
        changed = np.argwhere(diff > 0)
        assert len(changed) > 0
        assert changed[:, 0].min() >= 70 and changed[:, 0].max() < 70 + 16
        assert changed[:, 1].min() >= 60 and changed[:, 1].max() < 60 + 16
        report = seam_metrics(panel_color, result.image, faces)
        assert report.faces[0].band_max_abs > 0  # band crosses the stamped corner

    def test_constant_face_on_constant_panel(self):
        panel = np.full((300, 300, 3), 100, dtype=np.uint8)
        spec = spec_at(50, 50, 128)
        face = MappedFace(
            crop_spec=spec,
            image=np.full((512, 512, 3), 160, dtype=np.uint8),
            provenance=Provenance("identity", 0, MotionMode.RELATIVE, RetargetParams()),
        )
        result = compose(panel, [face])
        report = seam_metrics(panel, result.image, [face])
        face_seam = report.faces[0]
        assert face_seam.inner_mean_abs == (60.0, 60.0, 60.0)
        assert face_seam.outer_mean_abs == (0.0, 0.0, 0.0)
        assert face_seam.band_max_abs == 60

    def test_composed_must_match_panel_shape(self, panel_color, panel_gray):
        with pytest.raises(MismatchedPanel):
            seam_metrics(panel_color, panel_gray, [])
