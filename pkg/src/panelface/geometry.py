"""Square face-region geometry with exact coordinate bookkeeping.

Everything here is a pure function over small value types.  Landmark
coordinates stay continuous; squares become integer-valued when they are
clamped into a panel, and from then on the crop spec is the single source
of truth for the crop/compose round trip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DegenerateLandmarks, PanelTooSmall, SideTooSmall

CANONICAL_SIZE = 512
"""Side of the canonical face crop every engine consumes and produces."""

MIN_SIDE = 32
"""Smallest square side worth preparing; smaller regions are rejected."""

DEFAULT_PAD_FRAC = 0.30
"""Default padding around the landmark hull; generous enough to keep hair."""

LANDMARK_COUNT = 106


def round_half_away(value: float) -> int:
    """Round to nearest integer, halves away from zero."""
    return int(math.floor(value + 0.5)) if value >= 0 else -int(math.floor(-value + 0.5))


@dataclass(frozen=True, slots=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")


@dataclass(frozen=True)
class LandmarkSet:
    """The 106 facial landmark points of one face, in panel pixels."""

    points: tuple[Point2D, ...]

    def __post_init__(self) -> None:
        if len(self.points) != LANDMARK_COUNT:
            raise ValueError(f"expected {LANDMARK_COUNT} landmarks, got {len(self.points)}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "LandmarkSet":
        return cls(tuple(Point2D(float(x), float(y)) for x, y in pairs))

    def to_pairs(self) -> list[list[float]]:
        return [[p.x, p.y] for p in self.points]


@dataclass(frozen=True, slots=True)
class BBox:
    """Axis-aligned box; may lie partially outside a panel before clamping."""

    origin_x: float
    origin_y: float
    width: float
    height: float

    def __post_init__(self) -> None:
        if self.width < 0 or self.height < 0:
            raise ValueError(f"negative extent {self.width}x{self.height}")

    @property
    def center(self) -> tuple[float, float]:
        return (self.origin_x + self.width / 2.0, self.origin_y + self.height / 2.0)

    @property
    def is_square(self) -> bool:
        return self.width == self.height

    def contains_point(self, x: float, y: float) -> bool:
        return (
            self.origin_x <= x <= self.origin_x + self.width
            and self.origin_y <= y <= self.origin_y + self.height
        )


@dataclass(frozen=True)
class CropSpec:
    """Recorded square region plus the scale tying it to the canonical crop.

    ``scale * side == CANONICAL_SIZE`` holds exactly (the scale is kept as a
    rational, not a float), which is what makes the paste-back coordinates
    trustworthy after a save/load cycle.
    """

    panel_id: str
    square: BBox
    source: str  # "auto" | "manual"
    canonical_size: int = CANONICAL_SIZE

    def __post_init__(self) -> None:
        if not self.square.is_square:
            raise ValueError("crop square must have equal sides")
        if self.source not in ("auto", "manual"):
            raise ValueError(f"unknown crop source {self.source!r}")

    @property
    def side(self) -> int:
        return int(self.square.width)

    @property
    def scale(self) -> Fraction:
        return Fraction(self.canonical_size, self.side)


def tight_bbox(landmarks: LandmarkSet) -> BBox:
    """Axis-aligned min/max hull of the landmark points, no padding."""
    xs = [p.x for p in landmarks.points]
    ys = [p.y for p in landmarks.points]
    min_x, max_x = min(xs), max(xs)
    min_y, max_y = min(ys), max(ys)
    if max_x - min_x == 0 or max_y - min_y == 0:
        raise DegenerateLandmarks(f"landmark hull has zero extent ({max_x - min_x}x{max_y - min_y})")
    return BBox(min_x, min_y, max_x - min_x, max_y - min_y)


def squarify_pad(bbox: BBox, pad_frac: float) -> BBox:
    """Grow a box into a centered square with symmetric fractional padding.

    side = round(max(w, h) * (1 + 2 * pad_frac)); the center is preserved
    exactly and the result may extend beyond the panel (clamping is a
    separate step).
    """
    if bbox.width == 0 or bbox.height == 0:
        raise DegenerateLandmarks("cannot squarify a degenerate box")
    if not 0.0 <= pad_frac <= 1.0:
        raise ValueError(f"pad_frac {pad_frac} outside [0, 1]")
    side = float(round_half_away(max(bbox.width, bbox.height) * (1.0 + 2.0 * pad_frac)))
    cx, cy = bbox.center
    return BBox(cx - side / 2.0, cy - side / 2.0, side, side)


def clamp_square(square: BBox, panel_width: int, panel_height: int) -> BBox:
    """Fit a square inside panel bounds with integer coordinates.

    Policy: shrink the side to fit the panel first (origin kept), then
    translate the minimal distance needed for containment.
    """
    if not square.is_square:
        raise ValueError("clamp_square requires a square input")
    if min(panel_width, panel_height) < MIN_SIDE:
        raise PanelTooSmall(f"panel {panel_width}x{panel_height} is below min side {MIN_SIDE}")
    side = min(square.width, float(panel_width), float(panel_height))
    side_i = min(round_half_away(side), panel_width, panel_height)
    x = min(max(round_half_away(square.origin_x), 0), panel_width - side_i)
    y = min(max(round_half_away(square.origin_y), 0), panel_height - side_i)
    return BBox(float(x), float(y), float(side_i), float(side_i))


def make_crop_spec(panel_id: str, square: BBox, source: str) -> CropSpec:
    """Freeze a clamped square into the crop record used for paste-back."""
    if not square.is_square:
        raise ValueError("crop spec requires a square region")
    if square.width != int(square.width) or square.origin_x != int(square.origin_x) or square.origin_y != int(square.origin_y):
        raise ValueError("crop spec requires integer coordinates; clamp first")
    if square.width < MIN_SIDE:
        raise SideTooSmall(f"side {square.width:.0f} below minimum {MIN_SIDE}")
    return CropSpec(panel_id=panel_id, square=square, source=source)
