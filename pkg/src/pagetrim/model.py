"""Shared domain types for the page analysis pipeline."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional


class ScriptKind(Enum):
    """How a JavaScript unit reaches the page.

    INLINE    code inside a script tag in the index document.
    EXTERNAL  a script tag with a src URL in the index document.
    RECURSIVE a JS resource fetched by another script, invisible in the
              index document source.
    """

    INLINE = "inline"
    EXTERNAL = "external"
    RECURSIVE = "recursive"


class Category(Enum):
    """Third-party purpose classes used to tag script elements."""

    ADVERTISING = "Advertising"
    ANALYTICS = "Analytics"
    SOCIAL = "Social"
    VIDEO = "Video"
    UTILITIES = "Utilities"
    HOSTING = "Hosting"
    MARKETING = "Marketing"
    CUSTOMER_SUCCESS = "CustomerSuccess"
    CONTENT = "Content"
    CDN = "CDN"
    TAG_MANAGEMENT = "TagManagement"
    UNKNOWN = "Unknown"

    @classmethod
    def from_name(cls, name: str) -> "Category":
        for member in cls:
            if member.value == name:
                return member
        raise ValueError(f"unknown category name {name!r}")


class Criticality(Enum):
    CRITICAL = "critical"
    NON_CRITICAL = "noncritical"


# Per-session enabled/disabled state: element id -> enabled. The map is
# total over the inventory and kept closure-consistent by the depgraph ops.
Selection = dict[str, bool]


@dataclass(frozen=True)
class ScriptElement:
    """One JavaScript unit of a page.

    Ids are content-addressed (hash over kind, src, doc_range and content
    hash) so re-analysing the same snapshot always yields the same ids.
    """

    id: str
    kind: ScriptKind
    src: Optional[str]  # canonical URL; None for inline elements
    doc_range: Optional[tuple[int, int]]  # half-open byte span in the index
    content_hash: str
    byte_size: int
    category: Category = Category.UNKNOWN
    confidence: float = 0.0
    criticality: Criticality = Criticality.CRITICAL
    parents: tuple[str, ...] = ()
    body_missing: bool = False

    def with_classification(
        self, category: Category, confidence: float, criticality: Criticality
    ) -> "ScriptElement":
        return replace(
            self, category=category, confidence=confidence, criticality=criticality
        )

    def display_name(self) -> str:
        """Filename-ish label used by reports and the UI."""
        if self.src:
            tail = self.src.rstrip("/").rsplit("/", 1)[-1]
            return tail or self.src
        start = self.doc_range[0] if self.doc_range else 0
        return f"inline@{start}"


def element_id(
    kind: ScriptKind,
    src: Optional[str],
    doc_range: Optional[tuple[int, int]],
    content_hash: str,
) -> str:
    """Deterministic, content-addressed element identifier."""
    span = f"{doc_range[0]}-{doc_range[1]}" if doc_range else "-"
    material = "\x1f".join((kind.value, src or "-", span, content_hash))
    digest = hashlib.sha256(material.encode("utf-8")).hexdigest()[:12]
    prefix = {"inline": "in", "external": "ex", "recursive": "re"}[kind.value]
    return f"{prefix}-{digest}"


def content_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class ResourceRecord:
    """One captured HTTP response within a snapshot."""

    url: str
    status: int
    media_type: str
    headers: tuple[tuple[str, str], ...]
    body_path: str  # relative to the store root
    body_length: int
    initiator_url: Optional[str] = None


@dataclass(frozen=True)
class Snapshot:
    """A frozen capture of a page: index document plus all subresources."""

    snapshot_id: str
    index_url: str
    resources: dict[str, ResourceRecord] = field(default_factory=dict)
    captured_at: str = ""

    def record(self, url: str) -> Optional[ResourceRecord]:
        return self.resources.get(url)
