"""Offline replay of snapshots over HTTP, with optional URL blocking.

Recorded resources are addressed by their original absolute URL, percent
encoded into the path:

    /s/<snapshot_id>/<url-encoded-original-url>     exact recorded bytes
    /v/<snapshot_id>/<url-encoded-original-url>     browsing view: HTML gets
                                                    its subresource references
                                                    rewritten into the same
                                                    scheme, everything else is
                                                    byte-identical to /s/

A cache miss is a 404, never an upstream fetch; ``upstream_requests`` stays
0 for the lifetime of the server. Blocked URLs are answered by the stub
policy and never from their recorded body.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Optional
from urllib.parse import quote, unquote

from .errors import UrlError
from .extract import REF_ATTRS, tokenize
from .snapshot import SnapshotStore
from .urls import is_http_url, normalize_url


class StubPolicy(Enum):
    EMPTY_JS = "empty-js"
    FORBIDDEN = "forbidden"


@dataclass(frozen=True)
class ServeMode:
    """Replay, optionally with a block set answered by the stub policy."""

    blocked: frozenset[str] = frozenset()
    stub_policy: StubPolicy = StubPolicy.EMPTY_JS

    @classmethod
    def replay(cls) -> "ServeMode":
        return cls()

    @classmethod
    def with_blocklist(
        cls, urls, stub_policy: StubPolicy = StubPolicy.EMPTY_JS
    ) -> "ServeMode":
        return cls(blocked=frozenset(urls), stub_policy=stub_policy)


def _looks_like_js(url: str, media_type: str) -> bool:
    media = (media_type or "").split(";", 1)[0].strip().lower()
    if "javascript" in media or "ecmascript" in media:
        return True
    path = url.split("?", 1)[0].lower()
    return path.endswith(".js") or path.endswith(".mjs")


def stub_response(
    policy: StubPolicy, url: str, media_type: str = ""
) -> tuple[int, str, bytes]:
    """(status, media type, body) substituted for a blocked URL.

    EMPTY_JS keeps pages quiet: blocked scripts load as empty JS instead of
    erroring; blocked non-JS answers 204. FORBIDDEN answers 403 outright.
    """
    if policy is StubPolicy.FORBIDDEN:
        return 403, "text/plain", b""
    if _looks_like_js(url, media_type):
        return 200, "application/javascript", b""
    return 204, "", b""


def rewrite_html_refs(
    html: bytes, resource_url: str, mapper: Callable[[str], Optional[str]]
) -> bytes:
    """Replace subresource reference attributes via ``mapper``.

    Splices attribute values by byte range; the rest of the document is
    untouched. ``mapper`` gets the canonical absolute URL and returns the
    replacement value (or None to leave the attribute alone).
    """
    splices: list[tuple[int, int, bytes]] = []
    for event in tokenize(html):
        if event[0] != "start":
            continue
        tag = event[1]
        attr_name = REF_ATTRS.get(tag.name)
        if not attr_name:
            continue
        attr = tag.attr(attr_name)
        if attr is None or not attr.value or attr.value_range is None:
            continue
        try:
            absolute = normalize_url(attr.value.strip(), resource_url)
        except UrlError:
            continue
        mapped = mapper(absolute)
        if mapped is None:
            continue
        start, end = attr.value_range
        splices.append((start, end, mapped.encode("ascii")))
    out = html
    for start, end, replacement in sorted(splices, reverse=True):
        out = out[:start] + replacement + out[end:]
    return out


_HOP_BY_HOP = {
    "content-length",
    "content-encoding",
    "transfer-encoding",
    "connection",
    "keep-alive",
    "content-type",
}


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, *args):  # quiet
        pass

    def do_GET(self):
        server: "ReplayServer" = self.server.replay  # type: ignore[attr-defined]
        # a '?' inside the encoded original URL arrives as %3F, so anything
        # after a literal '?' is client cache-busting noise, not payload
        path = self.path.split("?", 1)[0]
        view = False
        if path.startswith("/v/"):
            view = True
        elif not path.startswith("/s/"):
            self._send(404, "text/plain", b"not found")
            return
        rest = path[3:]
        sid, _, encoded = rest.partition("/")
        if sid != server.snapshot_id:
            self._send(404, "text/plain", b"unknown snapshot")
            return
        if not encoded:
            # entry point: bounce to the index document
            target = server.url_for(server.index_url, view=view)
            self.send_response(302)
            self.send_header("Location", target)
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        try:
            url = normalize_url(unquote(encoded))
        except UrlError:
            self._send(400, "text/plain", b"bad resource url")
            return
        server.serve_resource(self, url, view)

    def _send(self, status: int, media_type: str, body: bytes, headers=()):
        self.send_response(status)
        for name, value in headers:
            if name.lower() in _HOP_BY_HOP:
                continue
            self.send_header(name, value)
        if media_type:
            self.send_header("Content-Type", media_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if body:
            self.wfile.write(body)


class ReplayServer:
    """One snapshot served over HTTP; mode and overlays swap atomically."""

    def __init__(
        self,
        store: SnapshotStore,
        snapshot_id: str,
        mode: ServeMode = ServeMode.replay(),
        host: str = "127.0.0.1",
        port: int = 0,
    ):
        self.store = store
        self.snapshot_id = snapshot_id
        self.mode = mode
        self.index_url = store.snapshot(snapshot_id).index_url
        self.upstream_requests = 0  # replay never fetches; asserted in tests
        self._overlay: dict[str, tuple[int, str, bytes]] = {}
        self._lock = threading.Lock()
        self._httpd = ThreadingHTTPServer((host, port), _Handler)
        self._httpd.replay = self  # type: ignore[attr-defined]
        self._httpd.daemon_threads = True
        self._httpd.block_on_close = False
        self._httpd.disable_nagle_algorithm = True
        self._thread: Optional[threading.Thread] = None

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> "ReplayServer":
        self._thread = threading.Thread(
            target=lambda: self._httpd.serve_forever(poll_interval=0.05), daemon=True
        )
        self._thread.start()
        return self

    def stop(self):
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def url_for(self, url: str, view: bool = False) -> str:
        prefix = "v" if view else "s"
        return f"{self.base_url}/{prefix}/{self.snapshot_id}/{quote(url, safe='')}"

    # -- state swaps --------------------------------------------------------

    def set_mode(self, mode: ServeMode):
        with self._lock:
            self.mode = mode

    def set_overlay(self, url: str, body: bytes, media_type: str = "text/html"):
        """Install bytes that take precedence over the recorded resource."""
        with self._lock:
            self._overlay[normalize_url(url)] = (200, media_type, body)

    def reconfigure(self, mode: ServeMode, overlays: dict[str, tuple[bytes, str]]):
        """Swap mode and overlays in one step so requests never see a mix."""
        with self._lock:
            self.mode = mode
            self._overlay = {
                normalize_url(url): (200, media, body)
                for url, (body, media) in overlays.items()
            }

    def clear_overlays(self):
        with self._lock:
            self._overlay.clear()

    # -- request handling ----------------------------------------------------

    def serve_resource(self, handler: _Handler, url: str, view: bool):
        with self._lock:
            mode = self.mode
            overlay = self._overlay.get(url)

        if url in mode.blocked:
            record = self.store.resolve(self.snapshot_id, url)
            status, media, body = stub_response(
                mode.stub_policy, url, record.media_type if record else ""
            )
            handler._send(status, media, body)
            return

        if overlay is not None:
            status, media, body = overlay
            if view and "html" in media:
                body = self._rewrite(body, url)
            handler._send(status, media, body)
            return

        record = self.store.resolve(self.snapshot_id, url)
        if record is None:
            handler._send(404, "text/plain", b"not in snapshot")
            return
        body = self.store.read_body(record)
        if view and "html" in (record.media_type or ""):
            body = self._rewrite(body, url)
        status = record.status if record.status >= 100 else 502
        handler._send(status, record.media_type, body, headers=record.headers)

    def _rewrite(self, body: bytes, resource_url: str) -> bytes:
        def mapper(absolute: str) -> Optional[str]:
            if not is_http_url(absolute):
                return None  # data:, about:, javascript: stay as they are
            return f"/v/{self.snapshot_id}/{quote(absolute, safe='')}"

        return rewrite_html_refs(body, resource_url, mapper)
