"""HTTP API over the session manager, plus static hosting of the UI bundle.

Endpoints (JSON bodies):
    POST /sessions                      {snapshotId, prefsPath?, rulesPath?}
    GET  /sessions
    GET  /sessions/{id}
    GET  /sessions/{id}/elements/{eid}/code       raw bytes
    POST /sessions/{id}/toggle          {elementId, enabled, revision}
    POST /sessions/{id}/apply           {revision}
    POST /sessions/{id}/save            {outDir}
    GET  /sessions/{id}/report

Errors are JSON {code, message}: 400 bad input, 404 unknown
session/element/snapshot, 409 stale revision.
"""

from __future__ import annotations

import json
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from .errors import (
    PageTrimError,
    RevisionConflictError,
    UnknownElementError,
    UnknownSessionError,
    UnknownSnapshotError,
)
from .session import SessionManager
from .snapshot import SnapshotStore


class _ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def _to_api_error(exc: Exception) -> _ApiError:
    if isinstance(exc, RevisionConflictError):
        return _ApiError(409, "conflict", str(exc))
    if isinstance(exc, (UnknownSessionError, UnknownSnapshotError, UnknownElementError)):
        return _ApiError(404, "not_found", str(exc))
    if isinstance(exc, PageTrimError):
        return _ApiError(400, "bad_request", str(exc))
    return _ApiError(500, "internal", str(exc))


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, *args):
        pass

    # -- helpers -------------------------------------------------------------

    def _json(self, status: int, payload):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _bytes(self, status: int, media_type: str, body: bytes):
        self.send_response(status)
        self.send_header("Content-Type", media_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, err: _ApiError):
        self._json(err.status, {"code": err.code, "message": err.message})

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            doc = json.loads(raw or b"{}")
        except json.JSONDecodeError:
            raise _ApiError(400, "bad_request", "request body is not valid JSON")
        if not isinstance(doc, dict):
            raise _ApiError(400, "bad_request", "request body must be a JSON object")
        return doc

    @property
    def api(self) -> "ApiServer":
        return self.server.api  # type: ignore[attr-defined]

    # -- routing ----------------------------------------------------------------

    def do_GET(self):
        try:
            self._route_get()
        except _ApiError as err:
            self._error(err)
        except Exception as exc:
            self._error(_to_api_error(exc))

    def do_POST(self):
        try:
            self._route_post()
        except _ApiError as err:
            self._error(err)
        except Exception as exc:
            self._error(_to_api_error(exc))

    def _route_get(self):
        parts = [p for p in self.path.split("?", 1)[0].split("/") if p]
        manager = self.api.manager
        if parts == ["sessions"]:
            with manager._lock:
                ids = sorted(manager.sessions)
            self._json(200, {"sessions": ids})
            return
        if len(parts) == 2 and parts[0] == "sessions":
            self._json(200, manager.get_state(parts[1]))
            return
        if len(parts) == 3 and parts[0] == "sessions" and parts[2] == "report":
            self._json(200, manager.report(parts[1]))
            return
        if (
            len(parts) == 5
            and parts[0] == "sessions"
            and parts[2] == "elements"
            and parts[4] == "code"
        ):
            code = manager.element_code(parts[1], parts[3])
            self._bytes(200, "application/octet-stream", code)
            return
        if self._serve_static(parts):
            return
        raise _ApiError(404, "not_found", f"no route for GET {self.path}")

    def _route_post(self):
        parts = [p for p in self.path.split("?", 1)[0].split("/") if p]
        manager = self.api.manager
        if parts == ["sessions"]:
            body = self._read_body()
            snapshot_id = body.get("snapshotId")
            if not snapshot_id:
                raise _ApiError(400, "bad_request", "snapshotId is required")
            session = manager.create_session(
                snapshot_id,
                prefs_path=body.get("prefsPath"),
                rules_path=body.get("rulesPath"),
            )
            self._json(201, manager.get_state(session.session_id))
            return
        if len(parts) == 3 and parts[0] == "sessions":
            sid, action = parts[1], parts[2]
            body = self._read_body()
            if action == "toggle":
                for name in ("elementId", "enabled", "revision"):
                    if name not in body:
                        raise _ApiError(400, "bad_request", f"{name} is required")
                result = manager.toggle(
                    sid, body["elementId"], bool(body["enabled"]), int(body["revision"])
                )
                self._json(200, result)
                return
            if action == "apply":
                result = manager.apply_selection(sid, body.get("revision"))
                self._json(200, result)
                return
            if action == "save":
                out_dir = body.get("outDir")
                if not out_dir:
                    raise _ApiError(400, "bad_request", "outDir is required")
                paths = manager.save_simplified(sid, out_dir)
                self._json(200, {"paths": paths})
                return
        raise _ApiError(404, "not_found", f"no route for POST {self.path}")

    # -- static UI ------------------------------------------------------------------

    def _serve_static(self, parts: list[str]) -> bool:
        ui_dir = self.api.ui_dir
        if ui_dir is None:
            return False
        if not parts:
            parts = ["index.html"]
        elif parts[0] == "ui":
            parts = parts[1:] or ["index.html"]
        target = (ui_dir / Path(*parts)).resolve()
        if not str(target).startswith(str(ui_dir.resolve())) or not target.is_file():
            return False
        media = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self._bytes(200, media, target.read_bytes())
        return True


class ApiServer:
    def __init__(
        self,
        store: SnapshotStore,
        host: str = "127.0.0.1",
        port: int = 0,
        ui_dir: Optional[str | Path] = None,
    ):
        self.manager = SessionManager(store)
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self._httpd = ThreadingHTTPServer((host, port), _Handler)
        self._httpd.api = self  # type: ignore[attr-defined]
        self._httpd.daemon_threads = True
        self._httpd.block_on_close = False
        self._httpd.disable_nagle_algorithm = True
        self._thread: Optional[threading.Thread] = None

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def start(self) -> "ApiServer":
        self._thread = threading.Thread(
            target=lambda: self._httpd.serve_forever(poll_interval=0.05), daemon=True
        )
        self._thread.start()
        return self

    def stop(self):
        self.manager.close_all()
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    def serve_forever(self):
        self._httpd.serve_forever(poll_interval=0.5)
