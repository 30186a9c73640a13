"""Rule-driven category and criticality assignment.

Each element gets a Category plus a confidence score from a weighted rule
table (host suffixes, path substrings, content tokens). Category and the
user's preferences decide criticality when confidence is high enough;
below the threshold a conservative content-feature fallback decides
("when in doubt, keep").
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Optional
from urllib.parse import urlsplit

from .errors import PreferencesParseError, RuleParseError
from .model import Category, Criticality, ScriptElement

RuleKind = str  # "host" | "path" | "token"


@dataclass(frozen=True)
class Rule:
    kind: RuleKind
    pattern: str
    category: Category
    weight: float


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]


@dataclass(frozen=True)
class Preferences:
    """Category criticality map (total over all categories) plus threshold."""

    criticality: dict[Category, Criticality]
    confidence_threshold: float = 0.5


# Content features that produce or wire up page content; any hit means the
# script may be load-bearing and must be kept.
DOM_FEATURE_TOKENS: tuple[bytes, ...] = (
    b"document.write",
    b"createElement(",
    b"appendChild(",
    b"insertBefore(",
    b"replaceChild(",
    b"insertAdjacentHTML",
    b"innerHTML",
    b"outerHTML",
    b"addEventListener(",
    b"attachEvent(",
)

# Beacon/pixel/cookie-sync style signals; only scripts that show these and
# no DOM features are judged droppable.
TRACKER_SIGNAL_TOKENS: tuple[bytes, ...] = (
    b"sendBeacon(",
    b"new Image(",
    b"/pixel",
    b"cookie_sync",
    b"cookiesync",
    b"trackEvent(",
    b"_trackPageview",
    b"collect?v=",
)


def _host_matches(host: str, pattern: str) -> bool:
    return host == pattern or host.endswith("." + pattern)


def classify(
    element: ScriptElement, rules: RuleSet, content: Optional[bytes] = None
) -> tuple[Category, float]:
    """Score the element against the rule table.

    Returns the category with the greatest summed weight over all matching
    rules (ties broken by rule order), confidence clamped to 1. No match
    yields (Unknown, 0).
    """
    host = ""
    path = ""
    if element.src:
        parts = urlsplit(element.src)
        host = (parts.hostname or "").lower()
        path = parts.path
    totals: dict[Category, float] = {}
    first_hit: dict[Category, int] = {}
    for index, rule in enumerate(rules.rules):
        if rule.kind == "host":
            matched = bool(host) and _host_matches(host, rule.pattern)
        elif rule.kind == "path":
            matched = bool(path) and rule.pattern in path
        else:  # token
            matched = content is not None and rule.pattern.encode("utf-8") in content
        if matched:
            totals[rule.category] = totals.get(rule.category, 0.0) + rule.weight
            first_hit.setdefault(rule.category, index)
    if not totals:
        return Category.UNKNOWN, 0.0
    best = max(totals.values())
    winner = min(
        (cat for cat, total in totals.items() if total == best),
        key=lambda cat: first_hit[cat],
    )
    return winner, min(1.0, totals[winner])


def fallback_criticality(
    element: ScriptElement, content: Optional[bytes] = None
) -> Criticality:
    """Content-feature criticality for low-confidence elements.

    DOM-producing or interaction features keep the element; pure tracker
    signals let it go; anything else (including missing content) is kept.
    """
    if not content:
        return Criticality.CRITICAL
    if any(token in content for token in DOM_FEATURE_TOKENS):
        return Criticality.CRITICAL
    if any(token in content for token in TRACKER_SIGNAL_TOKENS):
        return Criticality.NON_CRITICAL
    return Criticality.CRITICAL


def assign_criticality(
    category: Category,
    confidence: float,
    prefs: Preferences,
    element: ScriptElement,
    content: Optional[bytes] = None,
) -> Criticality:
    if confidence >= prefs.confidence_threshold:
        return prefs.criticality[category]
    return fallback_criticality(element, content)


def classify_inventory(
    elements: Iterable[ScriptElement],
    rules: RuleSet,
    prefs: Preferences,
    content_for: Callable[[ScriptElement], Optional[bytes]],
) -> list[ScriptElement]:
    """Classify every element; none is left Unknown/unscored by accident."""
    out = []
    for element in elements:
        content = content_for(element)
        category, confidence = classify(element, rules, content)
        criticality = assign_criticality(category, confidence, prefs, element, content)
        out.append(element.with_classification(category, confidence, criticality))
    return out


def _parse_weight(text: str, lineno: int) -> float:
    try:
        weight = float(text)
    except ValueError:
        raise RuleParseError(f"invalid weight {text!r}", lineno) from None
    if not 0.0 < weight <= 1.0:
        raise RuleParseError(f"weight {weight} outside (0, 1]", lineno)
    return weight


def _parse_category(text: str, lineno: int, error=RuleParseError) -> Category:
    try:
        return Category.from_name(text)
    except ValueError:
        raise error(f"unknown category name {text!r}", lineno) from None


def parse_rules(text: str) -> RuleSet:
    rules: list[Rule] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 4:
            raise RuleParseError(
                "expected `host|path|token <pattern> <Category> <weight>`", lineno
            )
        kind, pattern, category_name, weight_text = fields
        if kind not in ("host", "path", "token"):
            raise RuleParseError(f"unknown rule kind {kind!r}", lineno)
        if kind == "host":
            pattern = pattern.lower().lstrip(".")
        category = _parse_category(category_name, lineno)
        weight = _parse_weight(weight_text, lineno)
        rules.append(Rule(kind, pattern, category, weight))
    return RuleSet(tuple(rules))


def load_rules(path: str | Path) -> RuleSet:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_rules(fh.read())


def default_category_criticality() -> dict[Category, Criticality]:
    # Everything is kept by default; only the two categories users most
    # consistently volunteer to drop start out non-critical.
    mapping = {category: Criticality.CRITICAL for category in Category}
    mapping[Category.ADVERTISING] = Criticality.NON_CRITICAL
    mapping[Category.ANALYTICS] = Criticality.NON_CRITICAL
    return mapping


def parse_preferences(text: str) -> Preferences:
    mapping = default_category_criticality()
    threshold = 0.5
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise PreferencesParseError("expected `Name=critical|noncritical`", lineno)
        name, _, value = line.partition("=")
        name = name.strip()
        value = value.strip().lower()
        if name == "threshold":
            try:
                threshold = float(value)
            except ValueError:
                raise PreferencesParseError(f"invalid threshold {value!r}", lineno) from None
            if not 0.0 <= threshold <= 1.0:
                raise PreferencesParseError(f"threshold {threshold} outside [0, 1]", lineno)
            continue
        category = _parse_category(name, lineno, PreferencesParseError)
        if value in ("critical", "c"):
            mapping[category] = Criticality.CRITICAL
        elif value in ("noncritical", "non-critical", "nc"):
            mapping[category] = Criticality.NON_CRITICAL
        else:
            raise PreferencesParseError(f"invalid criticality {value!r}", lineno)
    return Preferences(criticality=mapping, confidence_threshold=threshold)


def load_preferences(path: str | Path) -> Preferences:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_preferences(fh.read())


@functools.lru_cache(maxsize=1)
def default_rules() -> RuleSet:
    text = resources.files("pagetrim").joinpath("data/default_rules.txt").read_text("utf-8")
    return parse_rules(text)


def default_preferences() -> Preferences:
    return Preferences(criticality=default_category_criticality())
