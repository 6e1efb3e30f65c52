"""Stage 3: coordinate-exact composition back into the panel.

Committed faces are resized from the canonical 512 crop to their recorded
side and written at their recorded origin.  The normative output is the
hard paste, seams included; the artist polishes in their own tools, so the
optional feather is plumbing, not a fidelity claim.  Seam metrics report
where the paste meets the panel; they measure, they do not judge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import MismatchedPanel, SpecOutOfBounds
from .geometry import CropSpec
from .raster import channels_of, ensure_image, resize_bilinear
from .session import MappedFace, Provenance

DEFAULT_SEAM_MARGIN = 4


@dataclass(frozen=True)
class FaceSeam:
    """Seam-band statistics for one pasted face.

    The band is the square's outermost 1-px ring plus ``margin`` pixels
    outward, clipped to the panel.  Means are |composed - original| per
    channel, in 8-bit levels.
    """

    crop_spec: CropSpec
    margin: int
    band_pixel_count: int
    inner_mean_abs: tuple[float, ...]
    outer_mean_abs: tuple[float, ...]
    band_mean_abs: tuple[float, ...]
    band_max_abs: int


@dataclass(frozen=True)
class SeamReport:
    faces: tuple[FaceSeam, ...]


@dataclass(frozen=True)
class PasteRecord:
    crop_spec: CropSpec
    provenance: Provenance


@dataclass(frozen=True)
class ComposedPanel:
    image: np.ndarray
    pasted: tuple[PasteRecord, ...]
    seams: SeamReport
    warnings: tuple[str, ...]


def _check_spec_fits(spec: CropSpec, width: int, height: int) -> tuple[int, int, int]:
    x, y, side = int(spec.square.origin_x), int(spec.square.origin_y), spec.side
    if x < 0 or y < 0 or x + side > width or y + side > height:
        raise SpecOutOfBounds(f"square ({x},{y},{side}) exceeds panel {width}x{height}")
    return x, y, side


def _feather_alpha(side: int, feather_width: int) -> np.ndarray:
    """Per-pixel blend weight: 0 at the square's edge ring, rising linearly
    to 1 at depth ``feather_width``."""
    idx = np.arange(side, dtype=np.float64)
    depth_1d = np.minimum(idx, side - 1 - idx)
    depth = np.minimum(depth_1d[:, np.newaxis], depth_1d[np.newaxis, :])
    return np.clip(depth / float(feather_width), 0.0, 1.0)


def compose(
    panel: np.ndarray,
    faces: Sequence[MappedFace],
    feather_width: int = 0,
    panel_id: Optional[str] = None,
) -> ComposedPanel:
    """Resize each committed face back to its recorded side and paste it at
    its recorded origin, in list order (later faces win on overlap).

    feather_width 0 is the hard paste; above 0 a linear alpha ramp covers
    the outermost ``feather_width`` pixels inside the pasted square.  Pixels
    outside every pasted square are bit-identical to the source panel.
    """
    ensure_image(panel)
    if feather_width < 0:
        raise ValueError(f"feather_width must be >= 0, got {feather_width}")
    height, width = panel.shape[:2]
    gray = channels_of(panel) == 1
    out = panel.copy()
    warnings: list[str] = []
    placed: list[tuple[int, int, int, int]] = []  # face ordinal, x, y, side
    records: list[PasteRecord] = []
    for ordinal, face in enumerate(faces):
        spec = face.crop_spec
        if panel_id is not None and spec.panel_id != panel_id:
            raise MismatchedPanel(f"face {ordinal} belongs to panel {spec.panel_id!r}, not {panel_id!r}")
        x, y, side = _check_spec_fits(spec, width, height)
        for prev_ordinal, px, py, pside in placed:
            if x < px + pside and px < x + side and y < py + pside and py < y + side:
                warnings.append(f"face {ordinal} overlaps face {prev_ordinal}; later paste wins")
        resized = resize_bilinear(face.image, side, side)
        patch = resized[:, :, 0] if gray else resized
        if feather_width == 0:
            out[y : y + side, x : x + side] = patch
        else:
            alpha = _feather_alpha(side, feather_width)
            if not gray:
                alpha = alpha[:, :, np.newaxis]
            window = out[y : y + side, x : x + side].astype(np.float64)
            blended = alpha * patch.astype(np.float64) + (1.0 - alpha) * window
            out[y : y + side, x : x + side] = np.floor(blended + 0.5).astype(np.uint8)
        placed.append((ordinal, x, y, side))
        records.append(PasteRecord(crop_spec=spec, provenance=face.provenance))
    seams = seam_metrics(panel, out, faces)
    return ComposedPanel(image=out, pasted=tuple(records), seams=seams, warnings=tuple(warnings))


def _region_stats(diff: np.ndarray, mask: np.ndarray) -> tuple[tuple[float, ...], int]:
    """Mean |diff| per channel over the masked pixels."""
    count = int(mask.sum())
    if count == 0:
        return tuple(0.0 for _ in range(diff.shape[-1])), 0
    selected = diff[mask]
    return tuple(float(selected[:, c].mean()) for c in range(diff.shape[-1])), count


def seam_metrics(
    panel: np.ndarray,
    composed: np.ndarray,
    faces: Sequence[MappedFace],
    margin: int = DEFAULT_SEAM_MARGIN,
) -> SeamReport:
    """Measure |composed - original| around each pasted square's border."""
    ensure_image(panel)
    ensure_image(composed)
    if panel.shape != composed.shape:
        raise MismatchedPanel(f"composed shape {composed.shape} != panel shape {panel.shape}")
    if margin < 0:
        raise ValueError(f"margin must be >= 0, got {margin}")
    height, width = panel.shape[:2]
    pan = panel if panel.ndim == 3 else panel[:, :, np.newaxis]
    com = composed if composed.ndim == 3 else composed[:, :, np.newaxis]
    entries: list[FaceSeam] = []
    for face in faces:
        x, y, side = _check_spec_fits(face.crop_spec, width, height)
        wx0, wy0 = max(0, x - margin), max(0, y - margin)
        wx1, wy1 = min(width, x + side + margin), min(height, y + side + margin)
        window_diff = np.abs(
            com[wy0:wy1, wx0:wx1].astype(np.int16) - pan[wy0:wy1, wx0:wx1].astype(np.int16)
        )
        ys, xs = np.mgrid[wy0:wy1, wx0:wx1]
        in_square = (xs >= x) & (xs < x + side) & (ys >= y) & (ys < y + side)
        interior = (xs >= x + 1) & (xs < x + side - 1) & (ys >= y + 1) & (ys < y + side - 1)
        inner = in_square & ~interior
        outer = ~in_square
        band = inner | outer
        inner_mean, _ = _region_stats(window_diff, inner)
        outer_mean, _ = _region_stats(window_diff, outer)
        band_mean, band_count = _region_stats(window_diff, band)
        band_max = int(window_diff[band].max()) if band_count else 0
        entries.append(
            FaceSeam(
                crop_spec=face.crop_spec,
                margin=margin,
                band_pixel_count=band_count,
                inner_mean_abs=inner_mean,
                outer_mean_abs=outer_mean,
                band_mean_abs=band_mean,
                band_max_abs=band_max,
            )
        )
    return SeamReport(faces=tuple(entries))
