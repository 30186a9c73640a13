"""Snapshot store: frozen page captures with an embedded sqlite manifest.

Layout under the store root:
    manifest.sqlite          resource manifest + snapshot table
    bodies/<snapshot>/...    response bodies, one file each
    logs/<snapshot>.ndjson   the network log in the JSON-lines format

Bodies are stored decoded (post content-encoding), so recorded lengths are
the bytes a parser sees. A snapshot becomes immutable once sealed.
"""

from __future__ import annotations

import contextlib
import json
import re
import sqlite3
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Optional

from .errors import HarImportError, PageTrimError, UnknownSnapshotError, UrlError
from .extract import REF_ATTRS, NetworkLogEntry, parse_document, tokenize
from .har import parse_har
from .model import ResourceRecord, Snapshot
from .urls import is_http_url, normalize_url

_SCHEMA = """
CREATE TABLE IF NOT EXISTS snapshots (
    snapshot_id TEXT PRIMARY KEY,
    index_url   TEXT NOT NULL,
    captured_at TEXT NOT NULL,
    sealed      INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS resources (
    url           TEXT NOT NULL,
    snapshot_id   TEXT NOT NULL,
    status        INTEGER NOT NULL,
    media_type    TEXT NOT NULL,
    headers       BLOB NOT NULL,
    body_path     TEXT NOT NULL,
    body_length   INTEGER NOT NULL,
    initiator_url TEXT,
    seq           INTEGER NOT NULL,
    PRIMARY KEY (url, snapshot_id)
);
CREATE INDEX IF NOT EXISTS resources_by_snapshot ON resources (snapshot_id, seq);
"""

_SAFE_NAME_RE = re.compile(r"[^A-Za-z0-9._-]+")


def _safe_tail(url: str) -> str:
    tail = url.split("?", 1)[0].rstrip("/").rsplit("/", 1)[-1] or "resource"
    return _SAFE_NAME_RE.sub("_", tail)[:60]


class SnapshotStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "bodies").mkdir(exist_ok=True)
        (self.root / "logs").mkdir(exist_ok=True)
        with self._connect() as conn:
            conn.executescript(_SCHEMA)

    @contextlib.contextmanager
    def _connect(self):
        conn = sqlite3.connect(self.root / "manifest.sqlite")
        try:
            yield conn
            conn.commit()
        finally:
            conn.close()

    def create(self, index_url: str, snapshot_id: Optional[str] = None) -> "SnapshotWriter":
        snapshot_id = snapshot_id or f"snap-{uuid.uuid4().hex[:12]}"
        index_url = normalize_url(index_url)
        captured_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
        with self._connect() as conn:
            conn.execute(
                "INSERT INTO snapshots (snapshot_id, index_url, captured_at) VALUES (?, ?, ?)",
                (snapshot_id, index_url, captured_at),
            )
        (self.root / "bodies" / snapshot_id).mkdir(parents=True, exist_ok=True)
        return SnapshotWriter(self, snapshot_id, index_url)

    def snapshot_ids(self) -> list[str]:
        with self._connect() as conn:
            rows = conn.execute(
                "SELECT snapshot_id FROM snapshots ORDER BY captured_at, snapshot_id"
            ).fetchall()
        return [r[0] for r in rows]

    def _snapshot_row(self, snapshot_id: str):
        with self._connect() as conn:
            row = conn.execute(
                "SELECT snapshot_id, index_url, captured_at, sealed FROM snapshots "
                "WHERE snapshot_id = ?",
                (snapshot_id,),
            ).fetchone()
        if row is None:
            raise UnknownSnapshotError(f"no snapshot {snapshot_id!r} in {self.root}")
        return row

    def snapshot(self, snapshot_id: str) -> Snapshot:
        sid, index_url, captured_at, _sealed = self._snapshot_row(snapshot_id)
        resources: dict[str, ResourceRecord] = {}
        with self._connect() as conn:
            rows = conn.execute(
                "SELECT url, status, media_type, headers, body_path, body_length, "
                "initiator_url FROM resources WHERE snapshot_id = ? ORDER BY seq",
                (snapshot_id,),
            ).fetchall()
        for url, status, media_type, headers, body_path, body_length, initiator in rows:
            resources[url] = ResourceRecord(
                url=url,
                status=status,
                media_type=media_type,
                headers=tuple(tuple(h) for h in json.loads(headers)),
                body_path=body_path,
                body_length=body_length,
                initiator_url=initiator,
            )
        return Snapshot(
            snapshot_id=sid,
            index_url=index_url,
            resources=resources,
            captured_at=captured_at,
        )

    def resolve(self, snapshot_id: str, url: str) -> Optional[ResourceRecord]:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT url, status, media_type, headers, body_path, body_length, "
                "initiator_url FROM resources WHERE snapshot_id = ? AND url = ?",
                (snapshot_id, url),
            ).fetchone()
        if row is None:
            return None
        url, status, media_type, headers, body_path, body_length, initiator = row
        return ResourceRecord(
            url=url,
            status=status,
            media_type=media_type,
            headers=tuple(tuple(h) for h in json.loads(headers)),
            body_path=body_path,
            body_length=body_length,
            initiator_url=initiator,
        )

    def read_body(self, record: ResourceRecord) -> bytes:
        return (self.root / record.body_path).read_bytes()

    def bodies(self, snapshot_id: str) -> dict[str, bytes]:
        snap = self.snapshot(snapshot_id)
        return {url: self.read_body(rec) for url, rec in snap.resources.items()}

    def network_log(self, snapshot_id: str) -> list[NetworkLogEntry]:
        self._snapshot_row(snapshot_id)
        with self._connect() as conn:
            rows = conn.execute(
                "SELECT url, media_type, initiator_url, body_length FROM resources "
                "WHERE snapshot_id = ? ORDER BY seq",
                (snapshot_id,),
            ).fetchall()
        return [
            NetworkLogEntry(url=u, media_type=m, initiator_url=i, byte_size=n)
            for u, m, i, n in rows
        ]

    def log_path(self, snapshot_id: str) -> Path:
        return self.root / "logs" / f"{snapshot_id}.ndjson"


class SnapshotWriter:
    """Exclusive writer for one snapshot; call seal() exactly once."""

    def __init__(self, store: SnapshotStore, snapshot_id: str, index_url: str):
        self.store = store
        self.snapshot_id = snapshot_id
        self.index_url = index_url
        self._seq = 0
        self._sealed = False
        self._urls: set[str] = set()

    def add(
        self,
        url: str,
        status: int,
        media_type: str,
        headers: Iterable[tuple[str, str]],
        body: bytes,
        initiator_url: Optional[str] = None,
    ) -> bool:
        """Record one response; returns False for duplicate URLs (first wins)."""
        if self._sealed:
            raise PageTrimError("snapshot already sealed")
        url = normalize_url(url)
        if url in self._urls:
            return False
        self._urls.add(url)
        body_rel = f"bodies/{self.snapshot_id}/{self._seq:04d}_{_safe_tail(url)}"
        (self.store.root / body_rel).write_bytes(body)
        with self.store._connect() as conn:
            conn.execute(
                "INSERT INTO resources (url, snapshot_id, status, media_type, headers,"
                " body_path, body_length, initiator_url, seq)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (
                    url,
                    self.snapshot_id,
                    status,
                    media_type,
                    json.dumps([list(h) for h in headers]),
                    body_rel,
                    len(body),
                    initiator_url,
                    self._seq,
                ),
            )
        self._seq += 1
        return True

    def seal(self) -> str:
        if self._sealed:
            return self.snapshot_id
        if self.index_url not in self._urls:
            raise PageTrimError(
                f"index document {self.index_url} was never recorded; snapshot incomplete"
            )
        log = self.store.network_log(self.snapshot_id)
        lines = []
        for entry in log:
            obj = {"url": entry.url, "mediaType": entry.media_type, "byteSize": entry.byte_size}
            if entry.initiator_url:
                obj["initiatorUrl"] = entry.initiator_url
            lines.append(json.dumps(obj, sort_keys=True))
        self.store.log_path(self.snapshot_id).write_text(
            "\n".join(lines) + ("\n" if lines else ""), encoding="utf-8"
        )
        with self.store._connect() as conn:
            conn.execute(
                "UPDATE snapshots SET sealed = 1 WHERE snapshot_id = ?", (self.snapshot_id,)
            )
        self._sealed = True
        return self.snapshot_id


# --- capture -----------------------------------------------------------------

_CSS_URL_RE = re.compile(rb"""url\(\s*['"]?([^)'"]+)['"]?\s*\)""")
_CSS_IMPORT_RE = re.compile(rb"""@import\s+['"]([^'"]+)['"]""")


def html_references(html: bytes, base: str) -> list[str]:
    """Statically referenced subresource URLs, canonical, document order."""
    refs: list[str] = []
    for event in tokenize(html):
        if event[0] != "start":
            continue
        tag = event[1]
        attr_name = REF_ATTRS.get(tag.name)
        if not attr_name:
            continue
        attr = tag.attr(attr_name)
        if attr is None or not attr.value:
            continue
        try:
            url = normalize_url(attr.value.strip(), base)
        except UrlError:
            continue
        if is_http_url(url):
            refs.append(url)
    return refs


def css_references(css: bytes, base: str) -> list[str]:
    refs = []
    for match in list(_CSS_URL_RE.finditer(css)) + list(_CSS_IMPORT_RE.finditer(css)):
        raw = match.group(1).decode("utf-8", "replace").strip()
        if raw.startswith("data:"):
            continue
        try:
            url = normalize_url(raw, base)
        except UrlError:
            continue
        if is_http_url(url):
            refs.append(url)
    return refs


def _default_fetch(url: str):
    import requests

    resp = requests.get(url, timeout=30)
    media_type = resp.headers.get("Content-Type", "").split(";", 1)[0].strip()
    return resp.status_code, media_type, list(resp.headers.items()), resp.content


def capture(
    url: str,
    store: SnapshotStore,
    max_depth: int = 3,
    fetch: Optional[Callable] = None,
) -> str:
    """Fetch a page and its statically referenced subresources into a snapshot.

    Breadth-first over HTML/CSS references up to ``max_depth``; each record
    carries the URL of the resource that referenced it. A failing
    subresource is recorded (status 0 on transport errors) and the capture
    continues; only an index fetch failure aborts.
    """
    fetch = fetch or _default_fetch
    index_url = normalize_url(url)
    writer = store.create(index_url)

    status, media_type, headers, body = fetch(index_url)  # index errors propagate
    writer.add(index_url, status, media_type, headers, body, initiator_url=None)

    queue: list[tuple[str, str, int]] = []

    def enqueue(refs: list[str], initiator: str, depth: int):
        for ref in refs:
            queue.append((ref, initiator, depth))

    if "html" in media_type:
        enqueue(html_references(body, index_url), index_url, 1)

    while queue:
        target, initiator, depth = queue.pop(0)
        if depth > max_depth:
            continue
        try:
            status, media_type, headers, body = fetch(target)
        except Exception as exc:  # transport failure: record and continue
            writer.add(target, 0, "", [("X-Capture-Error", str(exc))], b"", initiator)
            continue
        if not writer.add(target, status, media_type, headers, body, initiator):
            continue  # already recorded
        if "html" in media_type:
            enqueue(html_references(body, target), target, depth + 1)
        elif "css" in media_type:
            enqueue(css_references(body, target), target, depth + 1)
    return writer.seal()


def import_har(
    path: str | Path, store: SnapshotStore, index_url: Optional[str] = None
) -> tuple[str, int]:
    """Create a snapshot from a HAR file; returns (snapshot_id, entry count)."""
    entries = parse_har(path)
    if not entries:
        raise HarImportError("HAR contains no entries")
    index = normalize_url(index_url) if index_url else entries[0].url
    if index not in {e.url for e in entries}:
        raise HarImportError(f"index document {index} not among HAR entries")
    writer = store.create(index)
    count = 0
    for entry in entries:
        initiator = entry.initiator_url
        if entry.url == index:
            initiator = None
        if writer.add(
            entry.url, entry.status, entry.media_type, entry.headers, entry.body, initiator
        ):
            count += 1
    writer.seal()
    return writer.snapshot_id, count


def analyze_snapshot(store: SnapshotStore, snapshot_id: str):
    """Convenience: (snapshot, document model, network log, bodies)."""
    snap = store.snapshot(snapshot_id)
    bodies = store.bodies(snapshot_id)
    index_body = bodies.get(snap.index_url, b"")
    doc = parse_document(index_body)
    log = store.network_log(snapshot_id)
    return snap, doc, log, bodies
