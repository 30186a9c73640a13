"""pagetrim: inventory, classify and selectively remove page JavaScript.

Pipeline: snapshot a page (capture or HAR import), extract every script
element including recursively fetched ones, classify each element's
purpose and criticality, track fetch dependencies, then splice disabled
scripts out of the page and serve before/after previews offline.
"""

from .classify import (
    Preferences,
    Rule,
    RuleSet,
    assign_criticality,
    classify,
    classify_inventory,
    default_preferences,
    default_rules,
    fallback_criticality,
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
)
from .errors import PageTrimError
from .extract import (
    DocumentModel,
    NetworkLogEntry,
    ScriptNode,
    build_inventory,
    is_javascript,
    load_network_log,
    parse_document,
)
from .har import har_network_log, parse_har
from .metrics import ReportCard, diff, resource_metrics, structural_similarity
from .model import (
    Category,
    Criticality,
    ResourceRecord,
    ScriptElement,
    ScriptKind,
    Selection,
    Snapshot,
)
from .replay import ReplayServer, ServeMode, StubPolicy
from .rewrite import BlockReport, SimplifiedArtifact, simplify, verify_simplification
from .session import SessionManager
from .snapshot import SnapshotStore, capture, import_har
from .urls import normalize_url

__version__ = "0.1.0"

__all__ = [
    "BlockReport",
    "Category",
    "Criticality",
    "DependencyGraph",
    "DocumentModel",
    "NetworkLogEntry",
    "PageTrimError",
    "Preferences",
    "ReplayServer",
    "ReportCard",
    "ResourceRecord",
    "Rule",
    "RuleSet",
    "ScriptElement",
    "ScriptKind",
    "ScriptNode",
    "Selection",
    "ServeMode",
    "SessionManager",
    "SimplifiedArtifact",
    "Snapshot",
    "SnapshotStore",
    "StubPolicy",
    "assign_criticality",
    "build_graph",
    "build_inventory",
    "capture",
    "classify",
    "classify_inventory",
    "default_preferences",
    "default_rules",
    "default_selection",
    "diff",
    "disable_closure",
    "enable_closure",
    "fallback_criticality",
    "groups",
    "har_network_log",
    "import_har",
    "is_javascript",
    "load_network_log",
    "load_preferences",
    "load_rules",
    "normalize_url",
    "parse_document",
    "parse_har",
    "promote_criticality",
    "resource_metrics",
    "simplify",
    "structural_similarity",
    "verify_simplification",
]
