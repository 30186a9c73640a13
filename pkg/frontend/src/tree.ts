// Checkbox tree of script elements, clustered by dependency group and
// indented by fetch depth. Checkbox state is whatever the server last
// confirmed; this module never computes closure locally.

import type { ElementInfo, SessionState } from "./types.js";

export interface TreeHandlers {
  onToggle(id: string, enabled: boolean): void;
  onInspect(id: string): void;
  onSelectAll(enabled: boolean): void;
}

export function formatBytes(n: number): string {
  if (n < 1024) return `${n} B`;
  if (n < 1024 * 1024) return `${(n / 1024).toFixed(1)} kB`;
  return `${(n / (1024 * 1024)).toFixed(1)} MB`;
}

function fetchDepths(elements: ElementInfo[]): Map<string, number> {
  const byId = new Map(elements.map((e) => [e.id, e]));
  const depths = new Map<string, number>();
  const depthOf = (id: string, trail: Set<string>): number => {
    const known = depths.get(id);
    if (known !== undefined) return known;
    if (trail.has(id)) return 0;
    trail.add(id);
    const el = byId.get(id);
    const parents = (el?.parents ?? []).filter((p) => byId.has(p));
    const depth = parents.length
      ? 1 + Math.max(...parents.map((p) => depthOf(p, trail)))
      : 0;
    depths.set(id, depth);
    return depth;
  };
  for (const el of elements) depthOf(el.id, new Set());
  return depths;
}

export function renderTree(
  doc: Document,
  state: SessionState,
  handlers: TreeHandlers,
): HTMLElement {
  const root = doc.createElement("div");
  root.className = "tree";

  if (state.elements.length === 0) {
    const empty = doc.createElement("p");
    empty.className = "empty";
    empty.textContent = "No script elements in this page.";
    root.appendChild(empty);
    return root;
  }

  const allEnabled = state.elements.every((e) => e.enabled);
  const noneEnabled = state.elements.every((e) => !e.enabled);
  const master = doc.createElement("label");
  master.className = "select-all";
  const masterBox = doc.createElement("input");
  masterBox.type = "checkbox";
  masterBox.setAttribute("data-role", "select-all");
  masterBox.checked = allEnabled;
  masterBox.indeterminate = !allEnabled && !noneEnabled;
  masterBox.addEventListener("change", () => handlers.onSelectAll(masterBox.checked));
  master.appendChild(masterBox);
  master.appendChild(doc.createTextNode(" Select all"));
  root.appendChild(master);

  const byId = new Map(state.elements.map((e) => [e.id, e]));
  const depths = fetchDepths(state.elements);

  state.groups.forEach((group, index) => {
    const cluster = doc.createElement("div");
    cluster.className = group.length > 1 ? "group linked" : "group";
    cluster.setAttribute("data-group", String(index));
    for (const id of group) {
      const el = byId.get(id);
      if (!el) continue;
      cluster.appendChild(renderElement(doc, el, depths.get(id) ?? 0, handlers));
    }
    root.appendChild(cluster);
  });
  return root;
}

function renderElement(
  doc: Document,
  el: ElementInfo,
  depth: number,
  handlers: TreeHandlers,
): HTMLElement {
  const row = doc.createElement("div");
  row.className = "element";
  row.setAttribute("data-depth", String(depth));
  row.style.marginLeft = `${depth * 1.2}em`;

  const label = doc.createElement("label");
  const box = doc.createElement("input");
  box.type = "checkbox";
  box.checked = el.enabled;
  box.setAttribute("data-element-id", el.id);
  box.addEventListener("change", () => handlers.onToggle(el.id, box.checked));
  label.appendChild(box);

  const name = doc.createElement("a");
  name.href = "#";
  name.className = "name";
  name.textContent = el.name;
  name.title = el.src ?? "inline code";
  name.addEventListener("click", (event) => {
    event.preventDefault();
    handlers.onInspect(el.id);
  });
  label.appendChild(name);
  row.appendChild(label);

  const badge = doc.createElement("span");
  badge.className = `badge badge-${el.category.toLowerCase()}`;
  badge.textContent = el.category;
  row.appendChild(badge);

  const kind = doc.createElement("span");
  kind.className = "kind";
  kind.textContent = el.kind;
  row.appendChild(kind);

  const size = doc.createElement("span");
  size.className = "size";
  size.textContent = formatBytes(el.byteSize);
  row.appendChild(size);

  return row;
}
