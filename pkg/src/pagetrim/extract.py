"""Script inventory extraction.

Parses the index document of a snapshot into byte-exact script nodes and
merges them with the recorded network log into a complete inventory of
script elements, including recursively fetched scripts that never appear
in the document source.

The tokenizer works directly on bytes so every reported range can be
sliced back out of the original document verbatim. It is deliberately
error tolerant: malformed markup never raises, it only narrows what is
recognized and appends to the warning list.
"""

from __future__ import annotations

import html
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional

from .errors import UrlError
from .model import (
    Category,
    Criticality,
    ScriptElement,
    ScriptKind,
    content_digest,
    element_id,
)
from .urls import normalize_url

_WS = b" \t\n\r\f"
_TAGNAME_RE = re.compile(rb"[a-zA-Z][a-zA-Z0-9:_-]*")
_ATTRNAME_RE = re.compile(rb"[^\s=/>]+")
_UNQUOTED_RE = re.compile(rb"[^\s>]*")

# Elements whose content the HTML tokenizer treats as raw text: markup
# inside them is not parsed, so a "<script>" appearing there is not a
# script element. noscript is included because the analysis targets
# script-enabled browsers, where its content stays inert.
RAWTEXT_TAGS = frozenset(
    {"script", "style", "title", "textarea", "xmp", "iframe", "noembed", "noframes", "noscript"}
)

# Attribute carrying the subresource reference, per tag. Shared by the
# capture crawler and the preview URL rewriter.
REF_ATTRS = {
    "script": "src",
    "img": "src",
    "iframe": "src",
    "source": "src",
    "video": "src",
    "audio": "src",
    "embed": "src",
    "link": "href",
}


@dataclass(frozen=True)
class Attr:
    name: str
    value: Optional[str]  # entity-decoded
    value_range: Optional[tuple[int, int]]  # raw byte span, excl. quotes


@dataclass(frozen=True)
class StartTag:
    name: str
    attrs: tuple[Attr, ...]
    start: int
    end: int
    self_closing: bool

    def attr(self, name: str) -> Optional[Attr]:
        for a in self.attrs:
            if a.name == name:
                return a
        return None


@dataclass(frozen=True)
class ScriptNode:
    """One script tag found in the index document."""

    doc_range: tuple[int, int]  # open tag '<' through close tag '>' (half-open)
    kind: ScriptKind  # INLINE or EXTERNAL
    src: Optional[str]  # raw attribute value, not canonicalized
    content: bytes
    type_attr: Optional[str] = None


@dataclass(frozen=True)
class DocumentModel:
    index_bytes: bytes
    script_nodes: tuple[ScriptNode, ...]
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class NetworkLogEntry:
    url: str  # canonical
    media_type: str
    initiator_url: Optional[str]
    byte_size: int


NetworkLog = list[NetworkLogEntry]


def tokenize(data: bytes) -> Iterator[tuple]:
    """Yield markup events over raw bytes.

    Events:
      ("text", start, end)
      ("comment", start, end)
      ("decl", start, end)            doctype / CDATA / processing instr.
      ("start", StartTag)
      ("rawtext", start, end, terminated)   follows the start of a rawtext tag
      ("end", name, start, end)
      ("warning", message)
    """
    n = len(data)
    lower = data.lower()
    i = 0
    while i < n:
        lt = data.find(b"<", i)
        if lt < 0:
            if i < n:
                yield ("text", i, n)
            return
        if lt > i:
            yield ("text", i, lt)
        nxt = data[lt + 1 : lt + 2]
        if data.startswith(b"<!--", lt):
            end = data.find(b"-->", lt + 2)
            if end < 0:
                yield ("warning", f"unterminated comment at byte {lt}")
                yield ("comment", lt, n)
                return
            yield ("comment", lt, end + 3)
            i = end + 3
        elif nxt == b"!" or nxt == b"?":
            gt = data.find(b">", lt + 2)
            if gt < 0:
                yield ("warning", f"unterminated declaration at byte {lt}")
                yield ("decl", lt, n)
                return
            yield ("decl", lt, gt + 1)
            i = gt + 1
        elif nxt == b"/":
            m = _TAGNAME_RE.match(data, lt + 2)
            gt = data.find(b">", lt + 2)
            if gt < 0:
                yield ("warning", f"unterminated close tag at byte {lt}")
                yield ("text", lt, n)
                return
            if m:
                yield ("end", m.group().decode("ascii").lower(), lt, gt + 1)
            else:
                yield ("decl", lt, gt + 1)  # `</>` and friends: dropped
            i = gt + 1
        elif _TAGNAME_RE.match(data, lt + 1):
            tag = _parse_start_tag(data, lt)
            if tag is None:
                yield ("warning", f"unterminated tag at byte {lt}")
                yield ("text", lt, n)
                return
            yield ("start", tag)
            i = tag.end
            if tag.name in RAWTEXT_TAGS:
                close = _find_rawtext_close(lower, data, tag.name, tag.end)
                if close is None:
                    yield ("warning", f"unterminated <{tag.name}> at byte {tag.start}")
                    yield ("rawtext", tag.end, tag.end, False)
                    # resume right after the open tag so later markup is found
                else:
                    content_end, close_end = close
                    yield ("rawtext", tag.end, content_end, True)
                    yield ("end", tag.name, content_end, close_end)
                    i = close_end
        else:
            # stray '<' treated as text
            yield ("text", lt, lt + 1)
            i = lt + 1


def _parse_start_tag(data: bytes, lt: int) -> Optional[StartTag]:
    n = len(data)
    m = _TAGNAME_RE.match(data, lt + 1)
    assert m is not None
    name = m.group().decode("ascii").lower()
    i = m.end()
    attrs: list[Attr] = []
    self_closing = False
    while True:
        while i < n and data[i] in _WS:
            i += 1
        if i >= n:
            return None
        c = data[i : i + 1]
        if c == b">":
            return StartTag(name, tuple(attrs), lt, i + 1, self_closing)
        if c == b"/":
            if data[i + 1 : i + 2] == b">":
                return StartTag(name, tuple(attrs), lt, i + 2, True)
            i += 1
            continue
        am = _ATTRNAME_RE.match(data, i)
        if am is None:
            i += 1
            continue
        attr_name = am.group().decode("utf-8", "replace").lower()
        i = am.end()
        while i < n and data[i] in _WS:
            i += 1
        value = None
        value_range = None
        if data[i : i + 1] == b"=":
            i += 1
            while i < n and data[i] in _WS:
                i += 1
            q = data[i : i + 1]
            if q in (b'"', b"'"):
                j = data.find(q, i + 1)
                if j < 0:
                    return None
                value_range = (i + 1, j)
                i = j + 1
            else:
                vm = _UNQUOTED_RE.match(data, i)
                value_range = (vm.start(), vm.end())
                i = vm.end()
            value = html.unescape(
                data[value_range[0] : value_range[1]].decode("utf-8", "replace")
            )
        attrs.append(Attr(attr_name, value, value_range))


def _find_rawtext_close(
    lower: bytes, data: bytes, name: str, pos: int
) -> Optional[tuple[int, int]]:
    """Locate ``</name``; returns (content_end, close_tag_end) or None."""
    pat = b"</" + name.encode("ascii")
    n = len(data)
    search = pos
    while True:
        hit = lower.find(pat, search)
        if hit < 0:
            return None
        after = data[hit + len(pat) : hit + len(pat) + 1]
        if after == b"" or after in (b">", b"/") or after[0] in _WS:
            gt = data.find(b">", hit + len(pat))
            if gt < 0:
                return None
            return hit, gt + 1
        search = hit + 1


def parse_document(index_bytes: bytes) -> DocumentModel:
    """Find every script tag in ``index_bytes`` with byte-exact ranges.

    Tolerant of malformed markup: anything unrecognizable is skipped with a
    warning instead of raising. Script tags inside comments or other raw
    text elements (style, textarea, ...) are not script elements and are
    not reported.
    """
    nodes: list[ScriptNode] = []
    warnings: list[str] = []
    pending: Optional[StartTag] = None
    content_span: Optional[tuple[int, int]] = None
    for event in tokenize(index_bytes):
        kind = event[0]
        if kind == "warning":
            warnings.append(event[1])
            continue
        if kind == "start" and event[1].name == "script":
            pending = event[1]
            content_span = None
            continue
        if pending is not None and kind == "rawtext":
            _, start, end, terminated = event
            if not terminated:
                pending = None  # node skipped; warning already emitted
                continue
            content_span = (start, end)
            continue
        if pending is not None and kind == "end" and event[1] == "script":
            assert content_span is not None
            src_attr = pending.attr("src")
            type_attr = pending.attr("type")
            src = src_attr.value.strip() if src_attr and src_attr.value else None
            content = index_bytes[content_span[0] : content_span[1]]
            nodes.append(
                ScriptNode(
                    doc_range=(pending.start, event[3]),
                    kind=ScriptKind.EXTERNAL if src else ScriptKind.INLINE,
                    src=src,
                    content=content,
                    type_attr=type_attr.value if type_attr else None,
                )
            )
            pending = None
            content_span = None
    return DocumentModel(index_bytes, tuple(nodes), tuple(warnings))


_JS_MEDIA_TYPES = frozenset(
    {
        "application/javascript",
        "application/x-javascript",
        "application/ecmascript",
        "application/x-ecmascript",
        "text/javascript",
        "text/x-javascript",
        "text/ecmascript",
        "text/x-ecmascript",
        "module",
    }
)

# Types too vague to overrule the filename; anything else that is not a
# JS type counts as a definite non-JS statement by the server.
_GENERIC_MEDIA_TYPES = frozenset(
    {"", "text/plain", "application/octet-stream", "binary/octet-stream"}
)


def is_javascript(record) -> bool:
    """True when a log entry / resource record carries JavaScript.

    The declared media type wins; only generic or empty types fall back to
    the .js/.mjs path suffix (trackers routinely mislabel their scripts).
    """
    media = (record.media_type or "").split(";", 1)[0].strip().lower()
    if media in _JS_MEDIA_TYPES:
        return True
    if media not in _GENERIC_MEDIA_TYPES:
        return False
    path = record.url.split("#", 1)[0].split("?", 1)[0].lower()
    return path.endswith(".js") or path.endswith(".mjs")


def load_network_log(path: str | Path) -> tuple[NetworkLog, list[str]]:
    """Read the JSON-lines network log format.

    One object per line: {"url", "mediaType", "initiatorUrl"?, "byteSize"}.
    URLs are canonicalized; duplicate URLs keep the first entry.
    """
    entries: list[NetworkLogEntry] = []
    warnings: list[str] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                url = normalize_url(obj["url"])
                initiator = obj.get("initiatorUrl")
                entry = NetworkLogEntry(
                    url=url,
                    media_type=str(obj.get("mediaType", "")),
                    initiator_url=normalize_url(initiator) if initiator else None,
                    byte_size=int(obj.get("byteSize", 0)),
                )
            except (json.JSONDecodeError, KeyError, ValueError, UrlError) as exc:
                warnings.append(f"line {lineno}: skipped malformed log entry ({exc})")
                continue
            if entry.url in seen:
                warnings.append(f"line {lineno}: duplicate URL {entry.url} ignored")
                continue
            seen.add(entry.url)
            entries.append(entry)
    return entries, warnings


def build_inventory(
    doc: DocumentModel,
    log: Iterable[NetworkLogEntry],
    base: str,
    bodies: Optional[Mapping[str, bytes]] = None,
) -> tuple[list[ScriptElement], list[str]]:
    """Merge document script nodes and the network log into one inventory.

    Every inline and external node yields an element; every JS-typed log
    entry whose URL matches no external src yields a recursive element with
    parents resolved through the initiator chain. All elements start out
    Unknown/Critical until classified.
    """
    bodies = bodies or {}
    log = list(log)
    warnings: list[str] = list(doc.warnings)
    index_url = normalize_url(base)
    log_by_url = {e.url: e for e in log}

    # First pass: decide identity material for document-level elements.
    specs: list[dict] = []
    for node in doc.script_nodes:
        if node.kind is ScriptKind.INLINE:
            specs.append(
                {
                    "kind": ScriptKind.INLINE,
                    "src": None,
                    "doc_range": node.doc_range,
                    "content_hash": content_digest(node.content),
                    "byte_size": len(node.content),
                    "body_missing": False,
                }
            )
            continue
        try:
            src = normalize_url(node.src, base)
        except UrlError as exc:
            warnings.append(f"unresolvable script src {node.src!r}: {exc}")
            src = node.src
        body = bodies.get(src)
        entry = log_by_url.get(src)
        if body is not None:
            size, digest, missing = len(body), content_digest(body), False
        elif entry is not None:
            size, digest, missing = entry.byte_size, content_digest(b""), True
            warnings.append(f"missing resource body for {src}")
        else:
            size, digest, missing = 0, content_digest(b""), True
            warnings.append(f"missing resource for {src}")
        specs.append(
            {
                "kind": ScriptKind.EXTERNAL,
                "src": src,
                "doc_range": node.doc_range,
                "content_hash": digest,
                "byte_size": size,
                "body_missing": missing,
            }
        )

    external_srcs = {s["src"] for s in specs if s["kind"] is ScriptKind.EXTERNAL}
    seen_recursive: set[str] = set()
    for entry in log:
        if entry.url == index_url or entry.url in external_srcs:
            continue
        if not is_javascript(entry):
            continue
        if entry.url in seen_recursive:  # duplicate log lines: first wins
            warnings.append(f"duplicate log entry for {entry.url} ignored")
            continue
        seen_recursive.add(entry.url)
        body = bodies.get(entry.url)
        if body is not None:
            size, digest, missing = len(body), content_digest(body), False
        else:
            size, digest, missing = entry.byte_size, content_digest(b""), True
            warnings.append(f"missing resource body for {entry.url}")
        specs.append(
            {
                "kind": ScriptKind.RECURSIVE,
                "src": entry.url,
                "doc_range": None,
                "content_hash": digest,
                "byte_size": size,
                "body_missing": missing,
            }
        )

    ids = [
        element_id(s["kind"], s["src"], s["doc_range"], s["content_hash"]) for s in specs
    ]
    ids_by_url: dict[str, list[str]] = {}
    for s, eid in zip(specs, ids):
        if s["src"]:
            ids_by_url.setdefault(s["src"], []).append(eid)

    def chain_parents(url: str) -> tuple[str, ...]:
        entry = log_by_url.get(url)
        seen: set[str] = {url}
        cur = entry.initiator_url if entry else None
        while cur and cur not in seen:
            seen.add(cur)
            if cur == index_url:
                return ()
            found = ids_by_url.get(cur)
            if found:
                return tuple(found)
            nxt = log_by_url.get(cur)
            cur = nxt.initiator_url if nxt else None
        return ()

    elements: list[ScriptElement] = []
    for s, eid in zip(specs, ids):
        parents: tuple[str, ...] = ()
        if s["src"]:
            parents = tuple(p for p in chain_parents(s["src"]) if p != eid)
        if s["kind"] is ScriptKind.RECURSIVE and not parents:
            warnings.append(f"recursive script {s['src']} has no resolvable parent")
        elements.append(
            ScriptElement(
                id=eid,
                kind=s["kind"],
                src=s["src"],
                doc_range=s["doc_range"],
                content_hash=s["content_hash"],
                byte_size=s["byte_size"],
                category=Category.UNKNOWN,
                confidence=0.0,
                criticality=Criticality.CRITICAL,
                parents=parents,
                body_missing=s["body_missing"],
            )
        )
    return elements, warnings
