from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from panelface.errors import DegenerateLandmarks, PanelTooSmall, SideTooSmall
from panelface.geometry import (
    BBox,
    LandmarkSet,
    clamp_square,
    make_crop_spec,
    round_half_away,
    squarify_pad,
    tight_bbox,
)

from conftest import rng_landmark_set
from oracles import minmax_hull


def landmarks_from(pairs) -> LandmarkSet:
    return LandmarkSet.from_pairs(pairs)


def pad_fill(corner_pairs, total=106):
    """corner points plus filler strictly inside their hull"""
    (x0, y0), (x1, y1) = corner_pairs
    inner = [
        (x0 + (x1 - x0) * (0.2 + 0.6 * i / total), y0 + (y1 - y0) * (0.3 + 0.4 * i / total))
        for i in range(total - 2)
    ]
    return [corner_pairs[0], corner_pairs[1], *inner]


class TestTightBBox:
    def test_minmax_hull(self):
        lm = landmarks_from(pad_fill([(0.0, 0.0), (10.0, 20.0)]))
        box = tight_bbox(lm)
        assert (box.origin_x, box.origin_y, box.width, box.height) == (0.0, 0.0, 10.0, 20.0)

    def test_degenerate_hull(self):
        lm = landmarks_from([(5.0, 5.0)] * 106)
        with pytest.raises(DegenerateLandmarks):
            tight_bbox(lm)

    def test_fixture_matches_bruteforce_oracle(self, landmarks_fixture):
        box = tight_bbox(landmarks_from(landmarks_fixture))
        ox, oy, w, h = minmax_hull(landmarks_fixture)
        assert (box.origin_x, box.origin_y, box.width, box.height) == (ox, oy, w, h)

    def test_every_landmark_inside_hull(self, landmarks_fixture):
        box = tight_bbox(landmarks_from(landmarks_fixture))
        for x, y in landmarks_fixture:
            assert box.contains_point(x, y)


class TestSquarifyPad:
    def test_no_pad_takes_max_side(self):
        out = squarify_pad(BBox(0, 0, 10, 20), 0.0)
        assert (out.origin_x, out.origin_y, out.width, out.height) == (-5.0, 0.0, 20.0, 20.0)

    def test_quarter_pad(self):
        out = squarify_pad(BBox(100, 100, 100, 100), 0.25)
        assert (out.origin_x, out.origin_y, out.width, out.height) == (75.0, 75.0, 150.0, 150.0)

    def test_thousand_random_boxes_against_recomputation(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            w = float(rng.uniform(0.5, 400))
            h = float(rng.uniform(0.5, 400))
            x = float(rng.uniform(-200, 800))
            y = float(rng.uniform(-200, 800))
            out = squarify_pad(BBox(x, y, w, h), 0.3)
            expected_side = math.floor(1.6 * max(w, h) + 0.5)
            assert out.width == out.height == expected_side
            cx, cy = out.center
            assert abs(cx - (x + w / 2)) <= 0.5
            assert abs(cy - (y + h / 2)) <= 0.5

    @given(
        pairs=st.lists(
            st.tuples(
                st.floats(-1e3, 1e3, allow_nan=False), st.floats(-1e3, 1e3, allow_nan=False)
            ),
            min_size=106,
            max_size=106,
        ),
        pad=st.floats(0.0, 1.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_hull_containment_property(self, pairs, pad):
        lm = landmarks_from(pairs)
        try:
            hull = tight_bbox(lm)
        except DegenerateLandmarks:
            return
        square = squarify_pad(hull, pad)
        for x, y in pairs:
            assert square.contains_point(x, y)


class TestClampSquare:
    def test_translates_into_bounds(self):
        out = clamp_square(BBox(-5, 0, 20, 20), 100, 100)
        assert (out.origin_x, out.origin_y, out.width, out.height) == (0.0, 0.0, 20.0, 20.0)

    def test_shrinks_then_translates_minimally(self):
        out = clamp_square(BBox(10, 10, 200, 200), 120, 150)
        assert (out.origin_x, out.origin_y, out.width, out.height) == (0.0, 10.0, 120.0, 120.0)

    def test_panel_too_small(self):
        with pytest.raises(PanelTooSmall):
            clamp_square(BBox(0, 0, 20, 20), 20, 500)

    def test_fuzz_containment(self):
        rng = np.random.default_rng(13)
        for _ in range(1000):
            pw = int(rng.integers(32, 1200))
            ph = int(rng.integers(32, 1200))
            side = float(rng.uniform(1, 1500))
            x = float(rng.uniform(-500, 1500))
            y = float(rng.uniform(-500, 1500))
            out = clamp_square(BBox(x, y, side, side), pw, ph)
            assert out.width == out.height
            assert out.width == int(out.width) and out.origin_x == int(out.origin_x)
            assert out.origin_y == int(out.origin_y)
            assert 0 <= out.origin_x and out.origin_x + out.width <= pw
            assert 0 <= out.origin_y and out.origin_y + out.height <= ph

    @given(
        x=st.floats(-2000, 2000),
        y=st.floats(-2000, 2000),
        side=st.floats(0, 3000),
        pw=st.integers(32, 2000),
        ph=st.integers(32, 2000),
    )
    @settings(max_examples=100, deadline=None)
    def test_containment_property(self, x, y, side, pw, ph):
        out = clamp_square(BBox(x, y, side, side), pw, ph)
        assert out.width == out.height
        assert 0 <= out.origin_x <= pw - out.width
        assert 0 <= out.origin_y <= ph - out.height


class TestCropSpec:
    @pytest.mark.parametrize("side,expected", [(256, 2.0), (512, 1.0), (200, 2.56)])
    def test_scale_values(self, side, expected):
        spec = make_crop_spec("p", BBox(0, 0, side, side), "auto")
        assert float(spec.scale) == expected

    def test_scale_exactness(self):
        for side in range(32, 1200, 7):
            spec = make_crop_spec("p", BBox(0, 0, side, side), "auto")
            assert spec.scale * side == 512
            assert spec.scale == Fraction(512, side)

    def test_side_too_small(self):
        with pytest.raises(SideTooSmall):
            make_crop_spec("p", BBox(0, 0, 20, 20), "auto")

    def test_requires_integer_square(self):
        with pytest.raises(ValueError):
            make_crop_spec("p", BBox(0.5, 0, 64, 64), "auto")


def test_round_half_away():
    assert round_half_away(0.5) == 1
    assert round_half_away(1.5) == 2
    assert round_half_away(2.5) == 3
    assert round_half_away(-0.5) == -1
    assert round_half_away(63.75) == 64
    assert round_half_away(127.5) == 128


def test_random_landmark_hull_against_oracle():
    rng = np.random.default_rng(41)
    for _ in range(200):
        pairs = rng_landmark_set(rng)
        box = tight_bbox(LandmarkSet.from_pairs(pairs))
        assert (box.origin_x, box.origin_y, box.width, box.height) == minmax_hull(pairs)
