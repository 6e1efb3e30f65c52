"""Thin synchronous client for the studio service.

The CLI and the acceptance suite both drive the pipeline through this
client, either against a live server (``connect``) or against an in-process
app over an ASGI bridge (``in_process``), so client results are the service
results by construction.
"""

from __future__ import annotations

import time
from typing import Optional, Sequence

import httpx

from .errors import PanelfaceError


class ServiceError(Exception):
    """A service-side error, rehydrated from the {code, message, retryable}
    body so callers can branch on the same codes the library raises."""

    def __init__(self, code: str, message: str, retryable: bool, http_status: int):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.retryable = retryable
        self.http_status = http_status


class StudioClient:
    def __init__(self, http: httpx.Client):
        self._http = http

    @classmethod
    def connect(cls, base_url: str, timeout: float = 120.0) -> "StudioClient":
        return cls(httpx.Client(base_url=base_url, timeout=timeout))

    @classmethod
    def in_process(cls, workspace) -> "StudioClient":
        import warnings

        with warnings.catch_warnings():
            # starlette's sync ASGI bridge warns about httpx pending httpx2
            warnings.filterwarnings("ignore", message="Using `httpx` with `starlette.testclient`")
            from starlette.testclient import TestClient

        from .service import create_app

        return cls(TestClient(create_app(workspace), raise_server_exceptions=False))

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "StudioClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _checked(self, response: httpx.Response) -> httpx.Response:
        if response.status_code >= 400:
            try:
                body = response.json()
                raise ServiceError(
                    code=body.get("code", "UnknownError"),
                    message=body.get("message", response.text),
                    retryable=bool(body.get("retryable", False)),
                    http_status=response.status_code,
                )
            except ValueError:
                raise ServiceError("UnknownError", response.text, False, response.status_code)
        return response

    def _json(self, response: httpx.Response) -> dict:
        return self._checked(response).json()

    # -- panels -----------------------------------------------------------

    def create_panel(self, png_bytes: bytes) -> dict:
        return self._json(
            self._http.post("/panels", content=png_bytes, headers={"content-type": "image/png"})
        )

    def list_panels(self) -> dict:
        return self._json(self._http.get("/panels"))

    # -- stage 1 ----------------------------------------------------------

    def detect(self, panel_id: str, detector: str, pad_frac: Optional[float] = None) -> dict:
        payload: dict = {"detector": detector}
        if pad_frac is not None:
            payload["pad_frac"] = pad_frac
        return self._json(self._http.post(f"/panels/{panel_id}/detect", json=payload))

    def manual_region(self, panel_id: str, x: float, y: float, width: float, height: float) -> dict:
        return self._json(
            self._http.post(
                f"/panels/{panel_id}/regions",
                json={"rect": {"x": x, "y": y, "width": width, "height": height}},
            )
        )

    def list_regions(self, panel_id: str) -> dict:
        return self._json(self._http.get(f"/panels/{panel_id}/regions"))

    # -- stage 2 ----------------------------------------------------------

    def engines(self) -> dict:
        return self._json(self._http.get("/engines"))

    def create_session(
        self,
        panel_id: str,
        face_index: int,
        engine: str,
        mode: str = "relative",
        frames_dir: Optional[str] = None,
        frames_b64: Optional[Sequence[str]] = None,
        keep_every: Optional[int] = None,
    ) -> dict:
        payload: dict = {
            "panel_id": panel_id,
            "face_index": face_index,
            "engine": engine,
            "mode": mode,
        }
        if frames_dir is not None:
            payload["frames_dir"] = frames_dir
        if frames_b64 is not None:
            payload["frames_b64"] = list(frames_b64)
        if keep_every is not None:
            payload["keep_every"] = keep_every
        return self._json(self._http.post("/sessions", json=payload))

    def request_frames(self, session_id: str, indices: Sequence[int]) -> dict:
        return self._json(
            self._http.post(f"/sessions/{session_id}/frames", json={"indices": list(indices)})
        )

    def status(self, session_id: str) -> dict:
        return self._json(self._http.get(f"/sessions/{session_id}"))

    def wait_for_frames(self, session_id: str, indices: Sequence[int], timeout: float = 60.0) -> dict:
        """Poll status until every requested frame is available."""
        wanted = set(indices)
        deadline = time.monotonic() + timeout
        while True:
            status = self.status(session_id)
            available = set(status["available_indices"])
            if wanted <= available:
                return status
            failed = {int(i) for i in status.get("frame_errors", {})} & wanted
            if failed and wanted <= available | failed:
                raise ServiceError("EngineFailure", f"frames {sorted(failed)} failed", True, 502)
            if time.monotonic() > deadline:
                raise TimeoutError(f"frames {sorted(wanted)} not available within {timeout}s")
            time.sleep(0.02)

    def frame_png(self, session_id: str, index: int) -> bytes:
        return self._checked(self._http.get(f"/sessions/{session_id}/frames/{index}")).content

    def set_params(
        self,
        session_id: str,
        eye: Optional[float] = None,
        lip: Optional[float] = None,
        mode: Optional[str] = None,
    ) -> dict:
        return self._json(
            self._http.post(
                f"/sessions/{session_id}/params", json={"eye": eye, "lip": lip, "mode": mode}
            )
        )

    def select_keyframe(self, session_id: str, index: int) -> dict:
        return self._json(self._http.post(f"/sessions/{session_id}/select", json={"index": index}))

    def commit(self, session_id: str) -> dict:
        return self._json(self._http.post(f"/sessions/{session_id}/commit"))

    def import_mapped(
        self, panel_id: str, x: int, y: int, side: int, image_b64: str, provenance: dict
    ) -> dict:
        return self._json(
            self._http.post(
                "/mapped/import",
                json={
                    "panel_id": panel_id,
                    "square": {"x": x, "y": y, "side": side},
                    "image_b64": image_b64,
                    "provenance": provenance,
                },
            )
        )

    # -- stage 3 ----------------------------------------------------------

    def compose(self, panel_id: str, mapped_ids: Sequence[str], feather_width: int = 0) -> dict:
        return self._json(
            self._http.post(
                f"/panels/{panel_id}/compose",
                json={"mapped_ids": list(mapped_ids), "feather_width": feather_width},
            )
        )

    def export(self, item_id: str) -> bytes:
        return self._checked(self._http.get(f"/export/{item_id}")).content

    def project_manifest(self) -> dict:
        return self._json(self._http.get("/project"))


def error_code(exc: Exception) -> str:
    """Uniform error code for library and service exceptions."""
    if isinstance(exc, ServiceError):
        return exc.code
    if isinstance(exc, PanelfaceError):
        return exc.code
    return type(exc).__name__
