#!/usr/bin/env python3
"""Record real studio-service responses for the UI contract tests.

Drives one canonical artist session against an in-process service and dumps
every exchange (including error replies) to tests/fixtures/recorded.json.
Re-run after changing the wire contract:

    python3 frontend/scripts/record_stub.py
"""

from __future__ import annotations

import base64
import json
import math
import tempfile
from pathlib import Path

import numpy as np

from panelface.engines import EngineRegistry
from panelface.prepare import FixtureDetector
from panelface.raster import encode_png
from panelface.service import create_app
from panelface.workspace import Workspace
from starlette.testclient import TestClient

OUT_PATH = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "recorded.json"


def ellipse_landmarks(cx: float, cy: float, rx: float, ry: float) -> list[list[float]]:
    return [
        [round(cx + rx * math.cos(2 * math.pi * i / 106), 2),
         round(cy + ry * math.sin(2 * math.pi * i / 106), 2)]
        for i in range(106)
    ]


def demo_panel() -> np.ndarray:
    yy, xx = np.mgrid[0:480, 0:640].astype(np.float64)
    img = 150 + 60 * np.sin(xx / 53.0) + 40 * np.cos(yy / 37.0)
    img[60:200, 240:420] = 230  # speech bubble
    disc = (xx - 180) ** 2 + (yy - 260) ** 2 <= 90 ** 2
    img[disc] = 80
    gray = np.clip(img, 0, 255).astype(np.uint8)
    return np.stack([gray, np.clip(gray + 12, 0, 255).astype(np.uint8), 255 - gray // 2], axis=2)


class Recorder:
    def __init__(self, client: TestClient):
        self.client = client
        self.exchanges: list[dict] = []

    def call(self, method: str, path: str, *, content: bytes | None = None, json_body: dict | None = None):
        if content is not None:
            response = self.client.request(method, path, content=content,
                                           headers={"content-type": "image/png"})
        elif json_body is not None:
            response = self.client.request(method, path, json=json_body)
        else:
            response = self.client.request(method, path)
        entry = {"method": method, "path": path, "status": response.status_code,
                 "content_type": response.headers.get("content-type", "application/json")}
        if entry["content_type"].startswith("image/"):
            entry["body_b64"] = base64.b64encode(response.content).decode("ascii")
        else:
            entry["json"] = response.json()
        self.exchanges.append(entry)
        return response


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        faces = [
            {"landmarks": ellipse_landmarks(180, 260, 75, 94), "confidence": 0.93, "yaw": 8.0},
            {"landmarks": ellipse_landmarks(480, 180, 40, 52), "confidence": 0.88, "yaw": -20.0},
            {"landmarks": ellipse_landmarks(560, 420, 3, 4), "confidence": 0.71},  # too small
        ]
        faces_path = tmp_path / "faces.json"
        faces_path.write_text(json.dumps(faces), encoding="utf-8")

        workspace = Workspace(
            tmp_path / "project",
            detectors={"mock": FixtureDetector(faces_path)},
            engines=EngineRegistry(),
        )
        client = TestClient(create_app(workspace), raise_server_exceptions=False)
        rec = Recorder(client)

        panel_png = encode_png(demo_panel())
        panel = rec.call("POST", "/panels", content=panel_png).json()
        pid = panel["panel_id"]

        rec.call("POST", f"/panels/{pid}/detect", json_body={"detector": "mock"})
        rec.call("GET", "/engines")

        # the square the drag controller submits for a 100x80 drag at (10, 10)
        rec.call("POST", f"/panels/{pid}/regions",
                 json_body={"rect": {"x": 10, "y": 10, "width": 100, "height": 100}})
        # a 5x5 drag: recorded so the UI test can assert the inline error
        rec.call("POST", f"/panels/{pid}/regions",
                 json_body={"rect": {"x": 0, "y": 0, "width": 5, "height": 5}})

        frames_b64 = [
            base64.b64encode(encode_png(np.full((24, 32, 3), (i * 23) % 256, dtype=np.uint8))).decode("ascii")
            for i in range(10)
        ]
        session = rec.call("POST", "/sessions", json_body={
            "panel_id": pid, "face_index": 2, "engine": "stamp",
            "mode": "relative", "frames_b64": frames_b64,
        }).json()
        sid = session["session_id"]

        rec.call("GET", f"/sessions/{sid}")  # pre-generation status (created, nothing available)
        rec.call("POST", f"/sessions/{sid}/frames", json_body={"indices": [4]})
        deadline_status = None
        for _ in range(200):
            deadline_status = client.get(f"/sessions/{sid}").json()
            if 4 in deadline_status["available_indices"]:
                break
        rec.call("GET", f"/sessions/{sid}")  # post-generation status (browsable, frame 4)
        rec.call("GET", f"/sessions/{sid}/frames/4")
        rec.call("POST", f"/sessions/{sid}/select", json_body={"index": 4})
        # sliders act on the selected frame, which is regenerated eagerly
        rec.call("POST", f"/sessions/{sid}/params", json_body={"eye": 0.6, "lip": None, "mode": None})
        mapped = rec.call("POST", f"/sessions/{sid}/commit").json()

        rec.call("POST", f"/panels/{pid}/compose",
                 json_body={"mapped_ids": [mapped["mapped_id"]], "feather_width": 0})
        rec.call("GET", f"/export/{pid}")
        rec.call("GET", "/export/composed-001")

        OUT_PATH.parent.mkdir(parents=True, exist_ok=True)
        OUT_PATH.write_text(json.dumps(rec.exchanges, indent=1) + "\n", encoding="utf-8")
        workspace.close()
        print(f"recorded {len(rec.exchanges)} exchanges -> {OUT_PATH}")


if __name__ == "__main__":
    main()
