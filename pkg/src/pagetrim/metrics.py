"""Deterministic resource metrics and page-variant comparison.

Byte counts are stored (decoded) body lengths, not on-wire sizes; the
structural similarity score is a cheap, deterministic stand-in for visual
comparison: half visible-text overlap, half media-resource overlap.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import FrozenSet, Optional, Union

from .extract import is_javascript, parse_document, tokenize
from .model import Snapshot

Reduction = Union[float, str]  # percentage rounded to 0.1, or "n/a"


@dataclass(frozen=True)
class ReportCard:
    request_count: int
    total_bytes: int
    js_request_count: int
    js_bytes: int
    script_tag_count: int

    def to_dict(self) -> dict:
        return {
            "requestCount": self.request_count,
            "totalBytes": self.total_bytes,
            "jsRequestCount": self.js_request_count,
            "jsBytes": self.js_bytes,
            "scriptTagCount": self.script_tag_count,
        }


def resource_metrics(
    snapshot: Snapshot,
    blocked: FrozenSet[str] = frozenset(),
    index_bytes: Optional[bytes] = None,
) -> ReportCard:
    """Counts over recorded resources minus the blocked set.

    ``index_bytes`` is the document whose script tags are counted — pass the
    rewritten index to measure a simplified variant.
    """
    unblocked = [r for r in snapshot.resources.values() if r.url not in blocked]
    js = [r for r in unblocked if is_javascript(r)]
    tags = len(parse_document(index_bytes).script_nodes) if index_bytes is not None else 0
    return ReportCard(
        request_count=len(unblocked),
        total_bytes=sum(r.body_length for r in unblocked),
        js_request_count=len(js),
        js_bytes=sum(r.body_length for r in js),
        script_tag_count=tags,
    )


def _reduction(before: int, after: int) -> Reduction:
    if before == 0:
        return "n/a"
    pct = Decimal(100 * (before - after)) / Decimal(before)
    return float(pct.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def diff(before: ReportCard, after: ReportCard) -> dict[str, Reduction]:
    """Reduction percentage per field, rounded half-up to 0.1."""
    return {
        "requestCount": _reduction(before.request_count, after.request_count),
        "totalBytes": _reduction(before.total_bytes, after.total_bytes),
        "jsRequestCount": _reduction(before.js_request_count, after.js_request_count),
        "jsBytes": _reduction(before.js_bytes, after.js_bytes),
        "scriptTagCount": _reduction(before.script_tag_count, after.script_tag_count),
    }


def _jaccard(a: Counter, b: Counter) -> float:
    union = sum((a | b).values())
    if union == 0:
        return 1.0  # both empty: equal
    return sum((a & b).values()) / union


def visible_text_tokens(html: bytes) -> Counter:
    """Whitespace-split, lowercased text outside script/style."""
    tokens: Counter = Counter()
    skip_rawtext = False
    for event in tokenize(html):
        kind = event[0]
        if kind == "start":
            skip_rawtext = event[1].name in ("script", "style")
        elif kind == "text":
            tokens.update(html[event[1] : event[2]].decode("utf-8", "replace").lower().split())
        elif kind == "rawtext" and not skip_rawtext:
            tokens.update(html[event[1] : event[2]].decode("utf-8", "replace").lower().split())
    return tokens


_MEDIA_TAGS = ("img", "video", "iframe")


def media_urls(html: bytes) -> set[str]:
    """src values of img/video/iframe elements (raw attribute text)."""
    out = set()
    for event in tokenize(html):
        if event[0] != "start":
            continue
        tag = event[1]
        if tag.name not in _MEDIA_TAGS:
            continue
        attr = tag.attr("src")
        if attr and attr.value:
            out.add(attr.value.strip())
    return out


def structural_similarity(original_html: bytes, simplified_html: bytes) -> float:
    """0.5 * text-token multiset Jaccard + 0.5 * media-URL set Jaccard."""
    if not isinstance(original_html, bytes) or not isinstance(simplified_html, bytes):
        raise TypeError("structural_similarity expects HTML bytes")
    text_score = _jaccard(
        visible_text_tokens(original_html), visible_text_tokens(simplified_html)
    )
    media_score = _jaccard(
        Counter(media_urls(original_html)), Counter(media_urls(simplified_html))
    )
    return 0.5 * text_score + 0.5 * media_score
