"""Local annotation service: static UI assets plus a small JSON data API.

Endpoints (all rooted at the manifest passed on startup):

- ``GET /api/frames`` — ``{"k": k, "frames": [{index, image_path, domain,
  annotated}, ...]}`` in manifest order.
- ``GET /api/image/<index>`` — the frame's image bytes.
- ``GET /api/annotation/<index>`` — the stored annotation document, 404 when
  the frame has none yet.
- ``PUT /api/annotation/<index>`` — body ``{k, cutoff_y: [k floats in [0,1]],
  annotator_id?}``; invalid payloads are rejected with 400 and nothing is
  written.
- anything else — static files from the UI directory (or a minimal built-in
  page when none is configured).

Writes go through the dataset module's atomic annotation writer, so
concurrent annotators saving different frames never interleave partial
files; per-file last-write-wins is the only shared-state rule.
"""

from __future__ import annotations

import json
import mimetypes
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .dataset import (
    Annotation,
    annotation_filename,
    load_manifest,
    save_annotation,
)

__all__ = ["AnnotationService", "build_server"]

MAX_BODY_BYTES = 1 << 20

PLACEHOLDER_PAGE = """<!doctype html>
<html>
<head><meta charset="utf-8"><title>travscore annotator</title></head>
<body>
<h1>travscore annotation service</h1>
<p>The data API is live under <code>/api/</code>. Point <code>--ui</code> at a
built annotator bundle to serve the interactive tool here.</p>
</body>
</html>
"""


class AnnotationService:
    """Manifest-backed state shared by all request handler threads."""

    def __init__(
        self,
        manifest_path: Union[str, Path],
        annotations_dir: Union[str, Path],
        k: int = 9,
    ) -> None:
        self.manifest_path = Path(manifest_path)
        self.annotations_dir = Path(annotations_dir)
        self.k = int(k)
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not self.manifest_path.is_file():
            raise FileNotFoundError(f"manifest not found: {self.manifest_path}")
        if not self.annotations_dir.is_dir():
            raise FileNotFoundError(
                f"annotations directory not found: {self.annotations_dir}"
            )
        self.records = load_manifest(self.manifest_path)
        self.root = self.manifest_path.parent

    def _record(self, index: int):
        if not (0 <= index < len(self.records)):
            raise IndexError(f"no frame with index {index}")
        return self.records[index]

    def annotation_path(self, index: int) -> Path:
        return self.annotations_dir / annotation_filename(
            self._record(index).image_path
        )

    def image_path(self, index: int) -> Path:
        path = Path(self._record(index).image_path)
        return path if path.is_absolute() else self.root / path

    def frames(self) -> List[Dict[str, Any]]:
        return [
            {
                "index": i,
                "image_path": record.image_path,
                "domain": record.domain,
                "annotated": self.annotation_path(i).is_file(),
            }
            for i, record in enumerate(self.records)
        ]

    def put_annotation(self, index: int, payload: Dict[str, Any]) -> Path:
        """Validate and atomically persist one annotation document.

        Raises ``ValueError`` (payload invalid) or ``IndexError`` (unknown
        frame) before anything touches the disk.
        """
        record = self._record(index)
        if not isinstance(payload, dict):
            raise ValueError("annotation payload must be a JSON object")
        if "cutoff_y" not in payload:
            raise ValueError("annotation payload is missing 'cutoff_y'")
        cutoffs = payload["cutoff_y"]
        if not isinstance(cutoffs, (list, tuple)):
            raise ValueError("'cutoff_y' must be a list of numbers")
        k = int(payload.get("k", self.k))
        if k != self.k:
            raise ValueError(f"annotation has k={k}, this dataset uses k={self.k}")
        annotation = Annotation(
            image_path=record.image_path,
            k=self.k,
            cutoff_y=tuple(float(y) for y in cutoffs),
            annotator_id=str(payload.get("annotator_id", "anonymous")),
            created_at=str(
                payload.get("created_at")
                or datetime.now(timezone.utc).isoformat()
            ),
        )
        path = self.annotation_path(index)
        save_annotation(annotation, path)
        return path


class _Handler(BaseHTTPRequestHandler):
    service: AnnotationService  # set on the subclass built by build_server
    ui_dir: Optional[Path]

    # -- plumbing ------------------------------------------------------------

    def log_message(self, format: str, *args: Any) -> None:  # noqa: A002
        pass  # request logging is noise for a local single-user tool

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, doc: Any) -> None:
        self._send(status, json.dumps(doc).encode(), "application/json")

    def _error(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    def _frame_index(self, tail: str) -> Optional[int]:
        try:
            return int(tail)
        except ValueError:
            self._error(400, f"bad frame index {tail!r}")
            return None

    # -- GET -----------------------------------------------------------------

    def do_GET(self) -> None:  # noqa: N802 (http.server API)
        path = self.path.split("?", 1)[0]
        try:
            if path == "/api/frames":
                self._send_json(
                    200, {"k": self.service.k, "frames": self.service.frames()}
                )
            elif path.startswith("/api/image/"):
                self._get_file_for_frame(path[len("/api/image/"):], kind="image")
            elif path.startswith("/api/annotation/"):
                self._get_file_for_frame(
                    path[len("/api/annotation/"):], kind="annotation"
                )
            elif path.startswith("/api/"):
                self._error(404, f"unknown API path {path}")
            else:
                self._static(path)
        except IndexError as exc:
            self._error(404, str(exc))

    def _get_file_for_frame(self, tail: str, kind: str) -> None:
        index = self._frame_index(tail)
        if index is None:
            return
        if kind == "image":
            target = self.service.image_path(index)
            default_type = "application/octet-stream"
        else:
            target = self.service.annotation_path(index)
            default_type = "application/json"
        if not target.is_file():
            self._error(404, f"no {kind} for frame {index}")
            return
        content_type = mimetypes.guess_type(target.name)[0] or default_type
        self._send(200, target.read_bytes(), content_type)

    def _static(self, path: str) -> None:
        if self.ui_dir is None:
            if path in ("/", "/index.html"):
                self._send(200, PLACEHOLDER_PAGE.encode(), "text/html; charset=utf-8")
            else:
                self._error(404, f"no static asset {path}")
            return
        relative = path.lstrip("/") or "index.html"
        root = self.ui_dir.resolve()
        target = (root / relative).resolve()
        if root not in target.parents and target != root:
            self._error(404, "not found")
            return
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._error(404, f"no static asset {path}")
            return
        content_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self._send(200, target.read_bytes(), content_type)

    # -- PUT -----------------------------------------------------------------

    def do_PUT(self) -> None:  # noqa: N802 (http.server API)
        path = self.path.split("?", 1)[0]
        if not path.startswith("/api/annotation/"):
            self._error(404, f"unknown API path {path}")
            return
        index = self._frame_index(path[len("/api/annotation/"):])
        if index is None:
            return
        length = int(self.headers.get("Content-Length", 0))
        if length > MAX_BODY_BYTES:
            self._error(413, "annotation payload too large")
            return
        raw = self.rfile.read(length)
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError as exc:
            self._error(400, f"body is not valid JSON: {exc}")
            return
        try:
            saved = self.service.put_annotation(index, payload)
        except IndexError as exc:
            self._error(404, str(exc))
            return
        except (ValueError, TypeError) as exc:
            self._error(400, str(exc))
            return
        self._send(200, saved.read_bytes(), "application/json")


def build_server(
    manifest_path: Union[str, Path],
    annotations_dir: Union[str, Path],
    port: int = 8787,
    host: str = "127.0.0.1",
    ui_dir: Optional[Union[str, Path]] = None,
    k: int = 9,
) -> ThreadingHTTPServer:
    """Bind the annotation service; caller runs ``serve_forever()``.

    ``port=0`` picks a free ephemeral port (the bound address is available
    as ``server.server_address``).
    """
    service = AnnotationService(manifest_path, annotations_dir, k=k)
    handler = type(
        "BoundHandler",
        (_Handler,),
        {
            "service": service,
            "ui_dir": Path(ui_dir) if ui_dir is not None else None,
        },
    )
    return ThreadingHTTPServer((host, port), handler)
