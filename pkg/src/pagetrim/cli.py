"""Command-line entry point.

Subcommands mirror the library one-to-one: capture, import-har, analyze,
simplify, serve, session, report. Exit codes: 0 success, 1 usage,
2 data error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .api import ApiServer
from .classify import default_preferences, default_rules, load_preferences, load_rules
from .depgraph import default_selection, groups, repair_selection
from .errors import PageTrimError
from .metrics import diff, resource_metrics
from .replay import ReplayServer, ServeMode, StubPolicy
from .rewrite import simplify as rewrite_simplify
from .rewrite import verify_simplification
from .session import run_pipeline
from .snapshot import SnapshotStore, capture, import_har

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> _Parser:
    parser = _Parser(prog="pagetrim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capture", help="fetch a page and its subresources into a snapshot")
    p.add_argument("url")
    p.add_argument("--out", required=True, help="snapshot store directory")
    p.add_argument("--max-depth", type=int, default=3)

    p = sub.add_parser("import-har", help="create a snapshot from a HAR 1.2 file")
    p.add_argument("file")
    p.add_argument("--out", required=True, help="snapshot store directory")
    p.add_argument("--index-url", help="index document URL (default: first entry)")

    p = sub.add_parser("analyze", help="inventory, groups and default selection")
    p.add_argument("snapshot_id")
    p.add_argument("--store", default="./snapshots")
    p.add_argument("--rules")
    p.add_argument("--prefs")
    p.add_argument("--json", action="store_true", dest="as_json")

    p = sub.add_parser("simplify", help="write the simplified page and reports")
    p.add_argument("snapshot_id")
    p.add_argument("--store", default="./snapshots")
    p.add_argument("--rules")
    p.add_argument("--prefs")
    p.add_argument("--selection", help="JSON file {elementId: bool}; may be partial")
    p.add_argument("--mark-removals", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("serve", help="serve a snapshot over HTTP")
    p.add_argument("snapshot_id")
    p.add_argument("--store", default="./snapshots")
    p.add_argument("--mode", choices=["replay", "blocked"], default="replay")
    p.add_argument("--blocklist", help="text file, one URL per line (mode=blocked)")
    p.add_argument("--stub", choices=[s.value for s in StubPolicy], default="empty-js")
    p.add_argument("--port", type=int, default=0)

    p = sub.add_parser("session", help="run the interactive session API")
    p.add_argument("--store", default="./snapshots")
    p.add_argument("--port", type=int, default=0)
    p.add_argument("--ui", help="static UI bundle directory (default: auto-detect)")

    p = sub.add_parser("report", help="before/after resource metrics")
    p.add_argument("snapshot_id")
    p.add_argument("--store", default="./snapshots")
    p.add_argument("--rules")
    p.add_argument("--prefs")
    p.add_argument("--selection")
    return parser


def _load_config(args):
    prefs = load_preferences(args.prefs) if getattr(args, "prefs", None) else default_preferences()
    rules = load_rules(args.rules) if getattr(args, "rules", None) else default_rules()
    return prefs, rules


def _analysis(args):
    store = SnapshotStore(args.store)
    prefs, rules = _load_config(args)
    snap, index_bytes, elements, graph, selection, code_map, warnings = run_pipeline(
        store, args.snapshot_id, prefs, rules
    )
    return store, snap, index_bytes, elements, graph, selection, warnings


def _selection_from_file(path, elements, graph):
    """Complete a (possibly partial) selection file and repair closure."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise PageTrimError("selection file must be a JSON object {elementId: bool}")
    known = {e.id for e in elements}
    unknown = set(raw) - known
    if unknown:
        raise PageTrimError(f"selection names unknown elements: {sorted(unknown)}")
    selection = default_selection(elements)
    selection.update({eid: bool(v) for eid, v in raw.items()})
    repaired, flips = repair_selection(graph, selection)
    if flips:
        print(f"warning: enabled ancestors to keep closure: {', '.join(flips)}", file=sys.stderr)
    return repaired


def _element_row(element, selection, group_index):
    return {
        "id": element.id,
        "kind": element.kind.value,
        "name": element.display_name(),
        "src": element.src,
        "docRange": list(element.doc_range) if element.doc_range else None,
        "category": element.category.value,
        "confidence": element.confidence,
        "criticality": element.criticality.value,
        "byteSize": element.byte_size,
        "parents": list(element.parents),
        "enabled": selection[element.id],
        "group": group_index,
    }


def cmd_capture(args) -> int:
    store = SnapshotStore(args.out)
    snapshot_id = capture(args.url, store, max_depth=args.max_depth)
    print(snapshot_id)
    return EXIT_OK


def cmd_import_har(args) -> int:
    store = SnapshotStore(args.out)
    snapshot_id, count = import_har(args.file, store, index_url=args.index_url)
    print(snapshot_id)
    print(f"imported {count} entries", file=sys.stderr)
    return EXIT_OK


def cmd_analyze(args) -> int:
    _store, _snap, _index, elements, graph, selection, warnings = _analysis(args)
    component_of = {}
    for index, component in enumerate(groups(graph)):
        for eid in component:
            component_of[eid] = index
    rows = sorted(
        (_element_row(e, selection, component_of.get(e.id, -1)) for e in elements),
        key=lambda r: r["id"],
    )
    if args.as_json:
        print(json.dumps(rows, indent=2, sort_keys=True))
        return EXIT_OK
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if not rows:
        print("no script elements")
        return EXIT_OK
    fmt = "{:1} {:<11} {:<9} {:<15} {:>6.2f} {:>9} g{:<3} {}"
    print(f"{'?':1} {'kind':<11} {'crit':<9} {'category':<15} {'conf':>6} {'bytes':>9} {'grp':<4} name")
    for row in rows:
        print(
            fmt.format(
                "x" if row["enabled"] else " ",
                row["kind"],
                row["criticality"],
                row["category"],
                row["confidence"],
                row["byteSize"],
                row["group"],
                row["name"],
            )
        )
    return EXIT_OK


def cmd_simplify(args) -> int:
    _store, snap, index_bytes, elements, graph, selection, _warnings = _analysis(args)
    if args.selection:
        selection = _selection_from_file(args.selection, elements, graph)
    artifact = rewrite_simplify(
        index_bytes, elements, selection, index_url=snap.index_url,
        mark_removals=args.mark_removals,
    )
    ok, diagnostics = verify_simplification(index_bytes, artifact, elements, selection)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "simplified.html").write_bytes(artifact.html_bytes)
    (out / "block_report.json").write_text(artifact.block_report.to_json(), encoding="utf-8")
    before = resource_metrics(snap, frozenset(), index_bytes)
    after = resource_metrics(snap, artifact.blocked_urls, artifact.html_bytes)
    (out / "metrics_before.json").write_text(
        json.dumps(before.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
    )
    (out / "metrics_after.json").write_text(
        json.dumps(after.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
    )
    if not ok:
        for line in diagnostics:
            print(f"verification: {line}", file=sys.stderr)
        return EXIT_VERIFY
    print(str(out))
    return EXIT_OK


def cmd_serve(args) -> int:
    store = SnapshotStore(args.store)
    mode = ServeMode.replay()
    if args.mode == "blocked":
        if not args.blocklist:
            raise PageTrimError("--mode blocked requires --blocklist")
        urls = [
            line.strip()
            for line in open(args.blocklist, encoding="utf-8")
            if line.strip() and not line.startswith("#")
        ]
        mode = ServeMode.with_blocklist(urls, StubPolicy(args.stub))
    server = ReplayServer(store, args.snapshot_id, mode=mode, port=args.port)
    print(
        f"serving snapshot {args.snapshot_id} at {server.base_url}/v/{args.snapshot_id}/",
        flush=True,
    )
    try:
        server.start()
        server._thread.join()
    except KeyboardInterrupt:
        server.stop()
    return EXIT_OK


def cmd_session(args) -> int:
    store = SnapshotStore(args.store)
    ui_dir = args.ui
    if ui_dir is None:
        bundled = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
        local = Path("frontend/dist")
        for candidate in (local, bundled):
            if candidate.is_dir():
                ui_dir = candidate
                break
    server = ApiServer(store, port=args.port, ui_dir=ui_dir)
    resumed = server.manager.resume_all()
    if resumed:
        print(f"resumed sessions: {', '.join(resumed)}", file=sys.stderr)
    print(f"session API listening on {server.base_url}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return EXIT_OK


def cmd_report(args) -> int:
    _store, snap, index_bytes, elements, graph, selection, _warnings = _analysis(args)
    if args.selection:
        selection = _selection_from_file(args.selection, elements, graph)
    artifact = rewrite_simplify(index_bytes, elements, selection, index_url=snap.index_url)
    before = resource_metrics(snap, frozenset(), index_bytes)
    after = resource_metrics(snap, artifact.blocked_urls, artifact.html_bytes)
    reductions = diff(before, after)
    rows = [
        ("requests", before.request_count, after.request_count, reductions["requestCount"]),
        ("total bytes", before.total_bytes, after.total_bytes, reductions["totalBytes"]),
        ("js requests", before.js_request_count, after.js_request_count, reductions["jsRequestCount"]),
        ("js bytes", before.js_bytes, after.js_bytes, reductions["jsBytes"]),
        ("script tags", before.script_tag_count, after.script_tag_count, reductions["scriptTagCount"]),
    ]
    print(f"{'metric':<12} {'before':>12} {'after':>12} {'reduction':>10}")
    for name, b, a, r in rows:
        shown = f"{r}%" if r != "n/a" else "n/a"
        print(f"{name:<12} {b:>12} {a:>12} {shown:>10}")
    return EXIT_OK


_COMMANDS = {
    "capture": cmd_capture,
    "import-har": cmd_import_har,
    "analyze": cmd_analyze,
    "simplify": cmd_simplify,
    "serve": cmd_serve,
    "session": cmd_session,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except PageTrimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
