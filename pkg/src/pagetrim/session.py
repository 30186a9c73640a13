"""Analysis sessions: the pipeline run plus interactive toggling state.

A session owns one snapshot analysis end to end: inventory extraction,
classification, dependency promotion, the default selection, and the two
preview servers (full replay vs. simplified replay-with-blocklist). Every
mutation goes through the closure operations and bumps a revision number;
mutating requests carry the revision they observed and conflict on a
mismatch so a stale client can refetch instead of corrupting state.

Sessions persist to ``<store root>/sessions/<id>.json`` after every
mutation and are resumed from there (preview servers restart on new
ports).
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .classify import (
    Preferences,
    RuleSet,
    classify_inventory,
    default_preferences,
    default_rules,
    load_preferences,
    load_rules,
)
from .depgraph import (
    DependencyGraph,
    build_graph,
    default_selection,
    disable_closure,
    enable_closure,
    groups,
    promote_criticality,
    repair_selection,
)
from .errors import (
    RevisionConflictError,
    UnknownElementError,
    UnknownSessionError,
)
from .extract import build_inventory
from .metrics import diff, resource_metrics, structural_similarity
from .model import ScriptElement, ScriptKind, Selection, Snapshot
from .replay import ReplayServer, ServeMode
from .rewrite import SimplifiedArtifact, simplify, verify_simplification
from .snapshot import SnapshotStore, analyze_snapshot


@dataclass
class Session:
    session_id: str
    snapshot_id: str
    snapshot: Snapshot
    index_bytes: bytes
    inventory: list[ScriptElement]
    graph: DependencyGraph
    selection: Selection
    prefs: Preferences
    rules: RuleSet
    code_map: dict[str, bytes]
    original_server: ReplayServer
    simplified_server: ReplayServer
    warnings: list[str]
    prefs_path: Optional[str] = None
    rules_path: Optional[str] = None
    revision: int = 1
    applied_revision: int = 0
    lock: threading.RLock = field(default_factory=threading.RLock)

    def preview_urls(self) -> dict[str, str]:
        index = self.snapshot.index_url
        return {
            "original": self.original_server.url_for(index, view=True),
            "simplified": self.simplified_server.url_for(index, view=True),
        }


def run_pipeline(
    store: SnapshotStore,
    snapshot_id: str,
    prefs: Preferences,
    rules: RuleSet,
) -> tuple[Snapshot, bytes, list[ScriptElement], DependencyGraph, Selection, dict[str, bytes], list[str]]:
    """Analyze a snapshot: extract, classify, promote, default-select."""
    snap, doc, log, bodies = analyze_snapshot(store, snapshot_id)
    elements, warnings = build_inventory(doc, log, snap.index_url, bodies)

    code_map: dict[str, bytes] = {}
    doc_level = [e for e in elements if e.doc_range is not None]
    for element, node in zip(doc_level, doc.script_nodes):
        if element.kind is ScriptKind.INLINE:
            code_map[element.id] = node.content
    for element in elements:
        if element.src and element.id not in code_map:
            code_map[element.id] = bodies.get(element.src, b"")

    elements = classify_inventory(
        elements, rules, prefs, lambda e: code_map.get(e.id)
    )
    graph = build_graph(elements)
    warnings.extend(graph.warnings)
    elements = promote_criticality(graph, elements)
    selection = default_selection(elements)
    index_bytes = bodies.get(snap.index_url, b"")
    return snap, index_bytes, elements, graph, selection, code_map, warnings


class SessionManager:
    """Owns live sessions over one snapshot store."""

    def __init__(self, store: SnapshotStore):
        self.store = store
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self.sessions_dir = store.root / "sessions"
        self.sessions_dir.mkdir(exist_ok=True)

    # -- lifecycle -----------------------------------------------------------

    def create_session(
        self,
        snapshot_id: str,
        prefs_path: Optional[str] = None,
        rules_path: Optional[str] = None,
        session_id: Optional[str] = None,
    ) -> Session:
        prefs = load_preferences(prefs_path) if prefs_path else default_preferences()
        rules = load_rules(rules_path) if rules_path else default_rules()
        snap, index_bytes, elements, graph, selection, code_map, warnings = run_pipeline(
            self.store, snapshot_id, prefs, rules
        )
        original = ReplayServer(self.store, snapshot_id).start()
        simplified = ReplayServer(self.store, snapshot_id).start()
        session = Session(
            session_id=session_id or f"sess-{uuid.uuid4().hex[:8]}",
            snapshot_id=snapshot_id,
            snapshot=snap,
            index_bytes=index_bytes,
            inventory=elements,
            graph=graph,
            selection=selection,
            prefs=prefs,
            rules=rules,
            code_map=code_map,
            original_server=original,
            simplified_server=simplified,
            warnings=warnings,
            prefs_path=prefs_path,
            rules_path=rules_path,
        )
        self._install_preview(session)
        session.applied_revision = session.revision
        with self._lock:
            self.sessions[session.session_id] = session
        self._persist(session)
        return session

    def close(self, session_id: str):
        session = self._get(session_id)
        session.original_server.stop()
        session.simplified_server.stop()
        with self._lock:
            self.sessions.pop(session_id, None)

    def close_all(self):
        for sid in list(self.sessions):
            self.close(sid)

    def _get(self, session_id: str) -> Session:
        with self._lock:
            session = self.sessions.get(session_id)
        if session is None:
            session = self._try_resume(session_id)
        if session is None:
            raise UnknownSessionError(f"no session {session_id!r}")
        return session

    # -- persistence -----------------------------------------------------------

    def _state_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.json"

    def _persist(self, session: Session):
        doc = {
            "sessionId": session.session_id,
            "snapshotId": session.snapshot_id,
            "revision": session.revision,
            "selection": session.selection,
            "prefsPath": session.prefs_path,
            "rulesPath": session.rules_path,
        }
        self._state_path(session.session_id).write_text(
            json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8"
        )

    def _try_resume(self, session_id: str) -> Optional[Session]:
        path = self._state_path(session_id)
        if not path.exists():
            return None
        doc = json.loads(path.read_text(encoding="utf-8"))
        session = self.create_session(
            doc["snapshotId"],
            prefs_path=doc.get("prefsPath"),
            rules_path=doc.get("rulesPath"),
            session_id=session_id,
        )
        saved = {k: bool(v) for k, v in doc.get("selection", {}).items()}
        known = {e.id for e in session.inventory}
        if set(saved) == known:
            repaired, _flips = repair_selection(session.graph, saved)
            session.selection = repaired
        session.revision = int(doc.get("revision", session.revision))
        self._install_preview(session)
        session.applied_revision = session.revision
        self._persist(session)
        return session

    def resume_all(self) -> list[str]:
        resumed = []
        for path in sorted(self.sessions_dir.glob("*.json")):
            sid = path.stem
            with self._lock:
                present = sid in self.sessions
            if not present:
                try:
                    self._get(sid)
                    resumed.append(sid)
                except Exception:  # damaged state file: leave it for inspection
                    continue
        return resumed

    # -- mutations ----------------------------------------------------------------

    def toggle(
        self, session_id: str, element_id: str, enabled: bool, revision: int
    ) -> dict:
        session = self._get(session_id)
        with session.lock:
            if revision != session.revision:
                raise RevisionConflictError(session.revision, revision)
            if element_id not in session.graph.nodes:
                raise UnknownElementError(f"unknown element {element_id!r}")
            op = enable_closure if enabled else disable_closure
            new_selection = op(session.graph, session.selection, element_id)
            delta = {
                eid: value
                for eid, value in new_selection.items()
                if session.selection[eid] != value
            }
            if delta:
                session.selection = new_selection
                session.revision += 1
                self._persist(session)
            return {
                "revision": session.revision,
                "delta": delta,
                "selection": dict(session.selection),
            }

    def _artifact(self, session: Session) -> SimplifiedArtifact:
        return simplify(
            session.index_bytes,
            session.inventory,
            session.selection,
            index_url=session.snapshot.index_url,
        )

    def _install_preview(self, session: Session) -> SimplifiedArtifact:
        artifact = self._artifact(session)
        session.simplified_server.reconfigure(
            mode=ServeMode.with_blocklist(artifact.blocked_urls),
            overlays={session.snapshot.index_url: (artifact.html_bytes, "text/html")},
        )
        return artifact

    def apply_selection(self, session_id: str, revision: Optional[int] = None) -> dict:
        session = self._get(session_id)
        with session.lock:
            if revision is not None and revision != session.revision:
                raise RevisionConflictError(session.revision, revision)
            changed = session.applied_revision != session.revision
            if changed:
                self._install_preview(session)
                session.applied_revision = session.revision
            return {
                "revision": session.revision,
                "changed": changed,
                "previewUrls": session.preview_urls(),
            }

    # -- outputs ---------------------------------------------------------------------

    def save_simplified(self, session_id: str, out_dir: str | Path) -> dict[str, str]:
        session = self._get(session_id)
        with session.lock:
            artifact = self._artifact(session)
            ok, diagnostics = verify_simplification(
                session.index_bytes, artifact, session.inventory, session.selection
            )
            if not ok:
                raise RuntimeError(f"simplification failed verification: {diagnostics}")
            before = resource_metrics(session.snapshot, frozenset(), session.index_bytes)
            after = resource_metrics(
                session.snapshot, artifact.blocked_urls, artifact.html_bytes
            )
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            paths = {
                "html": out / "simplified.html",
                "block_report": out / "block_report.json",
                "metrics_before": out / "metrics_before.json",
                "metrics_after": out / "metrics_after.json",
            }
            paths["html"].write_bytes(artifact.html_bytes)
            paths["block_report"].write_text(artifact.block_report.to_json(), encoding="utf-8")
            paths["metrics_before"].write_text(
                json.dumps(before.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
            )
            paths["metrics_after"].write_text(
                json.dumps(after.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
            )
            return {name: str(path) for name, path in paths.items()}

    def report(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            artifact = self._artifact(session)
            before = resource_metrics(session.snapshot, frozenset(), session.index_bytes)
            after = resource_metrics(
                session.snapshot, artifact.blocked_urls, artifact.html_bytes
            )
            return {
                "before": before.to_dict(),
                "after": after.to_dict(),
                "reduction": diff(before, after),
                "similarity": structural_similarity(session.index_bytes, artifact.html_bytes),
                "blockReport": json.loads(artifact.block_report.to_json()),
            }

    def element_code(self, session_id: str, element_id: str) -> bytes:
        session = self._get(session_id)
        if element_id not in {e.id for e in session.inventory}:
            raise UnknownElementError(f"unknown element {element_id!r}")
        return session.code_map.get(element_id, b"")

    def get_state(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            elements = [
                {
                    "id": e.id,
                    "kind": e.kind.value,
                    "name": e.display_name(),
                    "src": e.src,
                    "docRange": list(e.doc_range) if e.doc_range else None,
                    "category": e.category.value,
                    "confidence": e.confidence,
                    "criticality": e.criticality.value,
                    "byteSize": e.byte_size,
                    "parents": list(e.parents),
                    "bodyMissing": e.body_missing,
                    "enabled": session.selection[e.id],
                }
                for e in session.inventory
            ]
            return {
                "sessionId": session.session_id,
                "snapshotId": session.snapshot_id,
                "indexUrl": session.snapshot.index_url,
                "revision": session.revision,
                "elements": elements,
                "groups": groups(session.graph),
                "edges": sorted(session.graph.edges),
                "selection": dict(session.selection),
                "previewUrls": session.preview_urls(),
                "warnings": list(session.warnings),
            }
