"""Fetch-dependency graph: grouping, toggle closure, criticality promotion.

Edges run parent -> child, meaning "the parent's execution fetches the
child". Enabling an element drags all its ancestors along (a child cannot
load without its parent); disabling one drags all descendants (they can
no longer be fetched). Criticality promotes upward: every ancestor of a
critical element is itself critical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .errors import UnknownElementError
from .model import Criticality, ScriptElement, Selection


@dataclass(frozen=True)
class DependencyGraph:
    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]  # (parent, child)
    warnings: tuple[str, ...] = ()

    def children(self, node: str) -> set[str]:
        return {c for p, c in self.edges if p == node}

    def parents(self, node: str) -> set[str]:
        return {p for p, c in self.edges if c == node}

    def ancestors(self, node: str) -> set[str]:
        return self._reach(node, downward=False)

    def descendants(self, node: str) -> set[str]:
        return self._reach(node, downward=True)

    def _reach(self, node: str, downward: bool) -> set[str]:
        if node not in self.nodes:
            raise UnknownElementError(f"unknown element {node!r}")
        seen: set[str] = set()
        frontier = [node]
        while frontier:
            current = frontier.pop()
            step = self.children(current) if downward else self.parents(current)
            for other in step:
                if other not in seen:
                    seen.add(other)
                    frontier.append(other)
        seen.discard(node)
        return seen


def build_graph(
    inventory: Sequence[ScriptElement],
    profile_edges: Iterable[tuple[str, str]] = (),
) -> DependencyGraph:
    """Build the DAG from each element's resolved fetch parents.

    Profiler-observed edges (parent id, child id) may be appended; edges to
    unknown nodes are skipped and any edge that would close a cycle is
    dropped, both with a warning (fetch order makes real cycles impossible,
    so a recorded one is log noise).
    """
    nodes = frozenset(e.id for e in inventory)
    warnings: list[str] = []
    candidate_edges: list[tuple[str, str]] = []
    for el in inventory:
        for parent in el.parents:
            candidate_edges.append((parent, el.id))
    candidate_edges.extend(profile_edges)

    edges: set[tuple[str, str]] = set()

    def reaches(start: str, goal: str) -> bool:
        frontier = [start]
        seen = set()
        while frontier:
            cur = frontier.pop()
            if cur == goal:
                return True
            for p, c in edges:
                if p == cur and c not in seen:
                    seen.add(c)
                    frontier.append(c)
        return False

    for parent, child in candidate_edges:
        if parent not in nodes or child not in nodes:
            warnings.append(f"edge {parent}->{child} references unknown element, skipped")
            continue
        if parent == child or reaches(child, parent):
            warnings.append(f"edge {parent}->{child} would close a cycle, dropped")
            continue
        edges.add((parent, child))
    return DependencyGraph(nodes=nodes, edges=frozenset(edges), warnings=tuple(warnings))


def load_profile_edges(path: str | Path) -> list[tuple[str, str]]:
    """Read profiler edges: JSON lines {parentId, childId, source}."""
    out: list[tuple[str, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            out.append((obj["parentId"], obj["childId"]))
    return out


def groups(graph: DependencyGraph) -> list[list[str]]:
    """Undirected connected components, deterministically ordered.

    Isolated nodes form singleton groups; components are sorted by their
    smallest member id, members sorted within each component.
    """
    neighbours: dict[str, set[str]] = {n: set() for n in graph.nodes}
    for p, c in graph.edges:
        neighbours[p].add(c)
        neighbours[c].add(p)
    seen: set[str] = set()
    components: list[list[str]] = []
    for node in sorted(graph.nodes):
        if node in seen:
            continue
        component = []
        frontier = [node]
        seen.add(node)
        while frontier:
            cur = frontier.pop()
            component.append(cur)
            for other in neighbours[cur]:
                if other not in seen:
                    seen.add(other)
                    frontier.append(other)
        components.append(sorted(component))
    components.sort(key=lambda c: c[0])
    return components


def _check_selection(graph: DependencyGraph, selection: Selection, target: str) -> None:
    if target not in graph.nodes:
        raise UnknownElementError(f"unknown element {target!r}")


def enable_closure(graph: DependencyGraph, selection: Selection, target: str) -> Selection:
    """Enable target plus every ancestor; everything else is untouched."""
    _check_selection(graph, selection, target)
    out = dict(selection)
    out[target] = True
    for node in graph.ancestors(target):
        out[node] = True
    return out


def disable_closure(graph: DependencyGraph, selection: Selection, target: str) -> Selection:
    """Disable target plus every descendant; everything else is untouched."""
    _check_selection(graph, selection, target)
    out = dict(selection)
    out[target] = False
    for node in graph.descendants(target):
        out[node] = False
    return out


def is_closure_consistent(graph: DependencyGraph, selection: Selection) -> bool:
    """No enabled element may have a disabled ancestor."""
    return not any(
        selection.get(child) and not selection.get(parent) for parent, child in graph.edges
    )


def promote_criticality(
    graph: DependencyGraph, inventory: Sequence[ScriptElement]
) -> list[ScriptElement]:
    """Make every ancestor of a critical element critical; never demote."""
    critical: set[str] = {
        e.id for e in inventory if e.criticality is Criticality.CRITICAL
    }
    frontier = list(critical)
    while frontier:
        node = frontier.pop()
        for parent in graph.parents(node):
            if parent not in critical:
                critical.add(parent)
                frontier.append(parent)
    out = []
    for el in inventory:
        if el.id in critical and el.criticality is not Criticality.CRITICAL:
            el = replace(el, criticality=Criticality.CRITICAL)
        out.append(el)
    return out


def default_selection(inventory: Sequence[ScriptElement]) -> Selection:
    """Enabled iff critical; closure-consistent on promoted inventories."""
    return {e.id: e.criticality is Criticality.CRITICAL for e in inventory}


def repair_selection(
    graph: DependencyGraph, selection: Selection
) -> tuple[Selection, list[str]]:
    """Minimal upward repair: enable every ancestor of an enabled element.

    Returns the repaired selection and the ids that were flipped.
    """
    out = dict(selection)
    flipped: list[str] = []
    for node in sorted(n for n, on in selection.items() if on):
        for ancestor in graph.ancestors(node):
            if not out.get(ancestor):
                out[ancestor] = True
                flipped.append(ancestor)
    return out, sorted(set(flipped))
