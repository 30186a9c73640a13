"""Simplified-page generation by byte-range splicing.

Disabled document-level scripts are cut out of the index bytes exactly;
every byte outside the removed spans is untouched, so the output can be
verified by plain byte comparison. Disabled recursive scripts cannot be
cut (they are not in the document) and are listed in a block report
instead, with the parent chain that fetches them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ConsistencyError, SelectionError
from .extract import parse_document
from .model import ScriptElement, ScriptKind, Selection


@dataclass(frozen=True)
class BlockReportEntry:
    url: str
    parents: tuple[str, ...]  # canonical URLs of the fetching scripts
    category: str
    reason: str


@dataclass(frozen=True)
class BlockReport:
    entries: tuple[BlockReportEntry, ...]

    def to_json(self) -> str:
        return json.dumps(
            {
                "blocked": [
                    {
                        "url": e.url,
                        "parents": list(e.parents),
                        "category": e.category,
                        "reason": e.reason,
                    }
                    for e in self.entries
                ]
            },
            indent=2,
            sort_keys=True,
        )


@dataclass(frozen=True)
class SimplifiedArtifact:
    html_bytes: bytes
    block_report: BlockReport
    removed_ranges: tuple[tuple[int, int], ...]
    blocked_urls: frozenset[str]
    mark_removals: bool = False


def _parent_urls(
    element: ScriptElement, by_id: Mapping[str, ScriptElement], index_url: str
) -> tuple[str, ...]:
    """Canonical URLs fetching this element; the index stands in for inline
    parents and for unattributed fetches so the report never lacks a source."""
    urls = []
    for pid in element.parents:
        parent = by_id.get(pid)
        if parent is not None and parent.src:
            urls.append(parent.src)
        else:
            urls.append(index_url)
    if not urls:
        urls.append(index_url)
    # de-dupe, keep order
    seen = set()
    out = []
    for u in urls:
        if u not in seen:
            seen.add(u)
            out.append(u)
    return tuple(out)


def simplify(
    index_bytes: bytes,
    inventory: Sequence[ScriptElement],
    selection: Selection,
    index_url: str = "",
    mark_removals: bool = False,
) -> SimplifiedArtifact:
    """Cut disabled document-level scripts out of the index.

    The selection must cover the inventory exactly. Spans are removed in
    descending start order so earlier offsets stay valid; with
    ``mark_removals`` an HTML comment naming the element id is left behind.
    """
    ids = {e.id for e in inventory}
    if set(selection) != ids:
        missing = ids - set(selection)
        extra = set(selection) - ids
        raise SelectionError(
            f"selection does not match inventory (missing={sorted(missing)}, "
            f"extra={sorted(extra)})"
        )

    doc_level = [
        e
        for e in inventory
        if e.kind in (ScriptKind.INLINE, ScriptKind.EXTERNAL) and e.doc_range is not None
    ]
    spans = sorted((e.doc_range for e in doc_level), key=lambda r: r[0])
    for (s0, e0), (s1, _) in zip(spans, spans[1:]):
        if s1 < e0:
            raise ConsistencyError(f"overlapping doc ranges at {s0}-{e0} and {s1}")

    removed = sorted(
        (e for e in doc_level if not selection[e.id]),
        key=lambda e: e.doc_range[0],
        reverse=True,
    )
    out = index_bytes
    for el in removed:
        start, end = el.doc_range
        marker = f"<!-- removed script {el.id} -->".encode("ascii") if mark_removals else b""
        out = out[:start] + marker + out[end:]

    by_id = {e.id: e for e in inventory}
    entries = []
    for el in inventory:
        if el.kind is ScriptKind.RECURSIVE and not selection[el.id]:
            entries.append(
                BlockReportEntry(
                    url=el.src or "",
                    parents=_parent_urls(el, by_id, index_url),
                    category=el.category.value,
                    reason="disabled recursive script",
                )
            )
    entries.sort(key=lambda e: e.url)

    blocked = frozenset(
        e.src
        for e in inventory
        if e.src and e.kind in (ScriptKind.EXTERNAL, ScriptKind.RECURSIVE) and not selection[e.id]
    )
    return SimplifiedArtifact(
        html_bytes=out,
        block_report=BlockReport(tuple(entries)),
        removed_ranges=tuple(sorted(e.doc_range for e in removed)),
        blocked_urls=blocked,
        mark_removals=mark_removals,
    )


def verify_simplification(
    original_bytes: bytes,
    artifact: SimplifiedArtifact,
    inventory: Sequence[ScriptElement],
    selection: Selection,
) -> tuple[bool, list[str]]:
    """Self-check: re-parse the output and match it against the enabled set.

    Passes iff the found script nodes correspond one-to-one (kind, src,
    content) with the enabled document-level elements and all untouched
    bytes survived. Failures come back as diagnostics, never exceptions.
    """
    diagnostics: list[str] = []

    expected = [
        e
        for e in inventory
        if e.kind in (ScriptKind.INLINE, ScriptKind.EXTERNAL)
        and e.doc_range is not None
        and selection.get(e.id)
    ]
    expected.sort(key=lambda e: e.doc_range[0])

    found = parse_document(artifact.html_bytes).script_nodes
    if len(found) != len(expected):
        diagnostics.append(
            f"expected {len(expected)} script nodes after rewrite, found {len(found)}"
        )

    for el, node in zip(expected, found):
        original_node = original_bytes[el.doc_range[0] : el.doc_range[1]]
        rewritten_node = artifact.html_bytes[node.doc_range[0] : node.doc_range[1]]
        if original_node != rewritten_node:
            diagnostics.append(f"element {el.id} altered by rewrite")
    for el in expected[len(found):]:
        diagnostics.append(f"enabled element {el.id} missing from output")
    for node in found[len(expected):]:
        diagnostics.append(f"unexpected script node at {node.doc_range} in output")

    # byte preservation outside removed spans (markers reconstructed when used)
    removed_elements = {
        e.doc_range: e
        for e in inventory
        if e.doc_range is not None and not selection.get(e.id)
    }
    kept = bytearray()
    pos = 0
    for start, end in artifact.removed_ranges:
        kept += original_bytes[pos:start]
        if artifact.mark_removals:
            el = removed_elements.get((start, end))
            if el is not None:
                kept += f"<!-- removed script {el.id} -->".encode("ascii")
        pos = end
    kept += original_bytes[pos:]
    if bytes(kept) != artifact.html_bytes:
        diagnostics.append("bytes outside removed spans were modified")

    return (not diagnostics, diagnostics)
