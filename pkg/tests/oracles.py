"""Independent reference implementations used as test oracles.

Deliberately written as plain scalar loops, sharing no code with the
library paths they check.
"""

from __future__ import annotations

import math

import numpy as np


def minmax_hull(pairs) -> tuple[float, float, float, float]:
    """Brute-force scan: (min_x, min_y, width, height) over [x, y] pairs."""
    min_x = min_y = math.inf
    max_x = max_y = -math.inf
    for x, y in pairs:
        min_x = x if x < min_x else min_x
        max_x = x if x > max_x else max_x
        min_y = y if y < min_y else min_y
        max_y = y if y > max_y else max_y
    return min_x, min_y, max_x - min_x, max_y - min_y


def reference_resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Scalar bilinear resampler: pixel-center aligned, clamped edges,
    rounded half away from zero to 8 bit."""
    src_h, src_w = img.shape[:2]
    three_d = img.ndim == 3
    channels = img.shape[2] if three_d else 1
    out = np.zeros((out_h, out_w, channels), dtype=np.uint8)
    for oy in range(out_h):
        sy = (oy + 0.5) * (src_h / out_h) - 0.5
        y0 = math.floor(sy)
        wy = sy - y0
        y1 = min(max(y0 + 1, 0), src_h - 1)
        y0 = min(max(y0, 0), src_h - 1)
        for ox in range(out_w):
            sx = (ox + 0.5) * (src_w / out_w) - 0.5
            x0 = math.floor(sx)
            wx = sx - x0
            x1 = min(max(x0 + 1, 0), src_w - 1)
            x0 = min(max(x0, 0), src_w - 1)
            for c in range(channels):
                if three_d:
                    p00, p01 = float(img[y0, x0, c]), float(img[y0, x1, c])
                    p10, p11 = float(img[y1, x0, c]), float(img[y1, x1, c])
                else:
                    p00, p01 = float(img[y0, x0]), float(img[y0, x1])
                    p10, p11 = float(img[y1, x0]), float(img[y1, x1])
                top = p00 * (1 - wx) + p01 * wx
                bottom = p10 * (1 - wx) + p11 * wx
                value = top * (1 - wy) + bottom * wy
                out[oy, ox, c] = min(255, max(0, math.floor(value + 0.5)))
    return out[:, :, 0] if not three_d else out
