from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"


def synth_panel(width: int, height: int, channels: int, seed: int) -> np.ndarray:
    """A deterministic manga-ish panel: smooth shading, a few flat regions
    and discs, sparse hard edges."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    img = (
        120.0
        + 55.0 * np.sin(xx / (41.0 + float(rng.integers(0, 13))))
        + 45.0 * np.cos(yy / (33.0 + float(rng.integers(0, 11))))
    )
    for _ in range(3):  # speech-bubble-ish flat rectangles
        w = int(rng.integers(width // 6, width // 3))
        h = int(rng.integers(height // 6, height // 3))
        x0 = int(rng.integers(0, max(1, width - w)))
        y0 = int(rng.integers(0, max(1, height - h)))
        img[y0 : y0 + h, x0 : x0 + w] = float(rng.integers(180, 256))
    for _ in range(2):  # face-ish discs
        cx = float(rng.integers(width // 4, 3 * width // 4))
        cy = float(rng.integers(height // 4, 3 * height // 4))
        r = float(rng.integers(min(width, height) // 8, min(width, height) // 4))
        mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
        img[mask] = float(rng.integers(40, 120))
    gray = np.clip(img, 0, 255).astype(np.uint8)
    if channels == 1:
        return gray
    shift = int(rng.integers(-25, 25))
    g = np.clip(gray.astype(np.int16) + shift, 0, 255).astype(np.uint8)
    b = np.clip(230 - gray.astype(np.int16) // 2, 0, 255).astype(np.uint8)
    return np.stack([gray, g, b], axis=2)


def make_frames(count: int, height: int = 24, width: int = 32) -> tuple[np.ndarray, ...]:
    """Distinct flat driving frames; engines only care about the index."""
    return tuple(
        np.full((height, width, 3), (i * 17) % 256, dtype=np.uint8) for i in range(count)
    )


def landmark_pairs() -> list[list[float]]:
    return json.loads((FIXTURES / "landmarks_A.json").read_text())


def transformed_landmarks(scale: float = 1.0, dx: float = 0.0, dy: float = 0.0) -> list[list[float]]:
    """The fixture face scaled about its hull center, then translated."""
    pairs = landmark_pairs()
    xs = [p[0] for p in pairs]
    ys = [p[1] for p in pairs]
    cx, cy = (min(xs) + max(xs)) / 2, (min(ys) + max(ys)) / 2
    return [
        [cx + (x - cx) * scale + dx, cy + (y - cy) * scale + dy] for x, y in pairs
    ]


def write_face_doc(path: Path, faces: list[dict]) -> Path:
    path.write_text(json.dumps(faces), encoding="utf-8")
    return path


@pytest.fixture
def landmarks_fixture() -> list[list[float]]:
    return landmark_pairs()


@pytest.fixture
def panel_gray() -> np.ndarray:
    return synth_panel(640, 480, 1, seed=11)


@pytest.fixture
def panel_color() -> np.ndarray:
    return synth_panel(640, 480, 3, seed=12)


def rng_landmark_set(rng: np.random.Generator, span: float = 200.0) -> list[tuple[float, float]]:
    """106 random finite points with a guaranteed non-degenerate hull."""
    cx = float(rng.uniform(0, 1000))
    cy = float(rng.uniform(0, 1000))
    pts = [
        (cx + float(rng.uniform(-span, span)), cy + float(rng.uniform(-span, span)))
        for _ in range(104)
    ]
    pts.append((cx - span * 1.01, cy - span * 1.01))
    pts.append((cx + span * 1.01, cy + span * 1.01))
    return pts
