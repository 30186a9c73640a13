import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from pagetrim.snapshot import SnapshotStore


class FixtureSite:
    """Tiny in-process origin serving a dict of path -> (media_type, bytes)."""

    def __init__(self, files: dict[str, tuple[str, bytes]]):
        self.files = dict(files)
        self.request_count = 0
        site = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, *args):
                pass

            def do_GET(self):
                site.request_count += 1
                entry = site.files.get(self.path)
                if entry is None:
                    body = b"missing"
                    self.send_response(404)
                    self.send_header("Content-Type", "text/plain")
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                    return
                media, body = entry
                self.send_response(200)
                self.send_header("Content-Type", media)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._httpd.daemon_threads = True
        self._httpd.block_on_close = False
        self._httpd.disable_nagle_algorithm = True
        self._thread = threading.Thread(
            target=lambda: self._httpd.serve_forever(poll_interval=0.05), daemon=True
        )
        self._thread.start()

    @property
    def base_url(self):
        return f"http://127.0.0.1:{self._httpd.server_address[1]}"

    def url(self, path):
        return self.base_url + path

    def close(self):
        self._httpd.shutdown()
        self._httpd.server_close()


@pytest.fixture
def fixture_site():
    sites = []

    def make(files):
        site = FixtureSite(files)
        sites.append(site)
        return site

    yield make
    for site in sites:
        site.close()


@pytest.fixture
def store(tmp_path):
    return SnapshotStore(tmp_path / "snapshots")


INDEX_URL = "https://site.test/index.html"

FOUR_ELEMENT_INDEX = (
    b"<html><head>\n"
    b'<script src="https://site.test/js/main.js"></script>\n'
    b'<script src="https://www.google-analytics.com/analytics.js"></script>\n'
    b"</head><body>\n"
    b"<p>Hello world</p>\n"
    b'<img src="https://site.test/logo.png">\n'
    b"<script>document.addEventListener('load', function () {});</script>\n"
    b"</body></html>\n"
)

MAIN_JS = b"var el = document.createElement('div'); document.body.appendChild(el);"
ANALYTICS_JS = b"navigator.sendBeacon('/collect?v=1', 'pv');"
EC_JS = b"window._ecq = [];"
LOGO_PNG = b"\x89PNG-not-really"


def build_four_element_snapshot(store, snapshot_id="snap-four"):
    """Index with 3 document scripts + 1 recursive analytics child + 1 image.

    Default pipeline: inline + main.js critical, analytics.js + its
    recursive child non-critical -> selection {2 enabled, 2 disabled}.
    """
    writer = store.create(INDEX_URL, snapshot_id=snapshot_id)
    writer.add(INDEX_URL, 200, "text/html", [("Content-Type", "text/html")], FOUR_ELEMENT_INDEX)
    writer.add("https://site.test/js/main.js", 200, "text/javascript", [], MAIN_JS,
               initiator_url=INDEX_URL)
    writer.add("https://www.google-analytics.com/analytics.js", 200, "text/javascript", [],
               ANALYTICS_JS, initiator_url=INDEX_URL)
    writer.add("https://www.google-analytics.com/plugins/ua/ec.js", 200, "text/javascript", [],
               EC_JS, initiator_url="https://www.google-analytics.com/analytics.js")
    writer.add("https://site.test/logo.png", 200, "image/png", [], LOGO_PNG,
               initiator_url=INDEX_URL)
    return writer.seal()


@pytest.fixture
def four_element_snapshot(store):
    return build_four_element_snapshot(store)


SIMPLE_SITE = {
    "/index.html": (
        "text/html",
        b"<html><head>"
        b'<link rel="stylesheet" href="/style.css">'
        b'<script src="/app.js"></script>'
        b"</head><body><p>hello</p>"
        b'<img src="/logo.png">'
        b"</body></html>",
    ),
    "/style.css": ("text/css", b"body { background: url(/bg.png); }"),
    "/app.js": ("application/javascript", b"console.log('app');"),
    "/logo.png": ("image/png", bytes(range(256))),
    "/bg.png": ("image/png", b"\x89PNG fake"),
}
