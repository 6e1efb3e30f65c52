"""Raster image handling: PNG io, channel plumbing, and exact resampling.

Images are numpy uint8 arrays, row-major: ``(h, w)`` for grayscale and
``(h, w, 3)`` for color.  The resampler is bilinear with pixel-center
alignment and half-away-from-zero rounding to 8 bit; one fixed filter keeps
the crop/compose round-trip tolerances definable.  When source and target
sides are equal the copy is bit-exact by construction.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import SpecOutOfBounds, UnreadableMedia
from .geometry import CANONICAL_SIZE, CropSpec


def ensure_image(img: np.ndarray) -> np.ndarray:
    """Validate dtype/shape and return the array unchanged."""
    if not isinstance(img, np.ndarray) or img.dtype != np.uint8:
        raise ValueError("image must be a uint8 numpy array")
    if img.ndim == 2:
        return img
    if img.ndim == 3 and img.shape[2] == 3:
        return img
    raise ValueError(f"image must be (h, w) or (h, w, 3), got shape {img.shape}")


def channels_of(img: np.ndarray) -> int:
    return 1 if img.ndim == 2 else img.shape[2]


def to_three_channel(img: np.ndarray) -> np.ndarray:
    """Replicate grayscale to 3 channels; color passes through."""
    ensure_image(img)
    if img.ndim == 2:
        return np.repeat(img[:, :, np.newaxis], 3, axis=2)
    return img


def decode_png(data: bytes) -> np.ndarray:
    """Decode PNG bytes to uint8 gray (h, w) or color (h, w, 3)."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            if im.mode == "L":
                return np.asarray(im, dtype=np.uint8)
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise UnreadableMedia(f"cannot decode image: {exc}") from exc


def encode_png(img: np.ndarray) -> bytes:
    """Encode to PNG bytes; deterministic for identical pixel content."""
    ensure_image(img)
    mode = "L" if img.ndim == 2 else "RGB"
    buf = io.BytesIO()
    Image.fromarray(img, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def load_png(path) -> np.ndarray:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise UnreadableMedia(f"cannot read {path}: {exc}") from exc
    return decode_png(data)


def save_png(img: np.ndarray, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_png(img))


def _axis_weights(src: int, dst: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Left indices, right indices and right-side weights for one axis."""
    coords = (np.arange(dst, dtype=np.float64) + 0.5) * (src / dst) - 0.5
    left = np.floor(coords).astype(np.int64)
    frac = coords - left
    right = np.clip(left + 1, 0, src - 1)
    left = np.clip(left, 0, src - 1)
    return left, right, frac


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Separable bilinear resize, pixel-center aligned, rounded half away."""
    ensure_image(img)
    src_h, src_w = img.shape[:2]
    if (src_h, src_w) == (out_h, out_w):
        return img.copy()
    squeeze = img.ndim == 2
    data = img.astype(np.float64)
    if squeeze:
        data = data[:, :, np.newaxis]
    y0, y1, fy = _axis_weights(src_h, out_h)
    x0, x1, fx = _axis_weights(src_w, out_w)
    fy = fy[:, np.newaxis, np.newaxis]
    fx = fx[np.newaxis, :, np.newaxis]
    rows = data[y0] * (1.0 - fy) + data[y1] * fy
    out = rows[:, x0] * (1.0 - fx) + rows[:, x1] * fx
    out = np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)
    return out[:, :, 0] if squeeze else out


def extract_crop(panel: np.ndarray, spec: CropSpec) -> np.ndarray:
    """Cut the crop spec's square out of the panel as a canonical 512x512x3 crop.

    Grayscale panels are channel-replicated; when the side is already 512
    the extraction is an exact pixel copy.
    """
    ensure_image(panel)
    h, w = panel.shape[:2]
    x, y, side = int(spec.square.origin_x), int(spec.square.origin_y), spec.side
    if x < 0 or y < 0 or x + side > w or y + side > h:
        raise SpecOutOfBounds(f"square ({x},{y},{side}) exceeds panel {w}x{h}")
    region = to_three_channel(panel[y : y + side, x : x + side])
    if side == spec.canonical_size:
        return region.copy()
    return resize_bilinear(region, spec.canonical_size, spec.canonical_size)


def is_canonical(img: np.ndarray) -> bool:
    return img.ndim == 3 and img.shape == (CANONICAL_SIZE, CANONICAL_SIZE, 3)
