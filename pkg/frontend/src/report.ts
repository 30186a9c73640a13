// Before/after report: metric table with the server's reduction values
// shown verbatim, similarity score, and the recursive-script block list.

import type { ReportData, Reduction } from "./types.js";

const METRIC_ROWS: [string, string][] = [
  ["requestCount", "Requests"],
  ["totalBytes", "Total bytes"],
  ["jsRequestCount", "JS requests"],
  ["jsBytes", "JS bytes"],
  ["scriptTagCount", "Script tags"],
];

export function reductionText(value: Reduction): string {
  return value === "n/a" ? "n/a" : `${value}%`;
}

export function renderReport(doc: Document, report: ReportData): HTMLElement {
  const root = doc.createElement("div");
  root.className = "report";

  const table = doc.createElement("table");
  table.className = "metrics";
  const head = doc.createElement("tr");
  for (const title of ["Metric", "Original", "Simplified", "Reduction"]) {
    const th = doc.createElement("th");
    th.textContent = title;
    head.appendChild(th);
  }
  table.appendChild(head);

  for (const [field, label] of METRIC_ROWS) {
    const tr = doc.createElement("tr");
    const name = doc.createElement("td");
    name.textContent = label;
    tr.appendChild(name);

    const before = doc.createElement("td");
    before.textContent = String((report.before as any)[field]);
    tr.appendChild(before);

    const after = doc.createElement("td");
    after.textContent = String((report.after as any)[field]);
    tr.appendChild(after);

    const reduction = doc.createElement("td");
    const value = report.reduction[field];
    reduction.className = "reduction";
    reduction.setAttribute("data-field", field);
    reduction.setAttribute("data-value", String(value));
    reduction.textContent = reductionText(value);
    tr.appendChild(reduction);
    table.appendChild(tr);
  }
  root.appendChild(table);

  const similarity = doc.createElement("p");
  similarity.className = "similarity";
  similarity.textContent = `Structural similarity: ${(report.similarity * 100).toFixed(1)}%`;
  root.appendChild(similarity);

  const blocked = report.blockReport.blocked;
  const heading = doc.createElement("h3");
  heading.textContent = `Blocked recursive scripts (${blocked.length})`;
  root.appendChild(heading);
  if (blocked.length > 0) {
    const list = doc.createElement("table");
    list.className = "block-report";
    for (const entry of blocked) {
      const tr = doc.createElement("tr");
      tr.className = "blocked-entry";
      const url = doc.createElement("td");
      url.textContent = entry.url;
      tr.appendChild(url);
      const parents = doc.createElement("td");
      parents.textContent = `fetched by ${entry.parents.join(", ")}`;
      tr.appendChild(parents);
      const category = doc.createElement("td");
      category.textContent = entry.category;
      tr.appendChild(category);
      list.appendChild(tr);
    }
    root.appendChild(list);
  }
  return root;
}
