// Bootstrap: wire the controller to the static page hosted by the
// `pagetrim session` command (same origin as the API).

import { ApiClient } from "./api.js";
import { SessionController } from "./app.js";
import { PreviewPanes } from "./preview.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

window.addEventListener("DOMContentLoaded", () => {
  const api = new ApiClient(window.location.origin);
  const previews = new PreviewPanes(
    el<HTMLIFrameElement>("preview-original"),
    el<HTMLIFrameElement>("preview-simplified"),
  );
  const controller = new SessionController(api, {
    doc: document,
    tree: el("tree"),
    code: el("code"),
    report: el("report"),
    status: el("status"),
    previews,
  });

  el<HTMLButtonElement>("analyze").addEventListener("click", () => {
    const snapshotId = el<HTMLInputElement>("snapshot-id").value.trim();
    if (!snapshotId) {
      controller.note("enter a snapshot id first");
      return;
    }
    controller.createSession(snapshotId).catch((err) => controller.note(String(err)));
  });

  el<HTMLButtonElement>("apply").addEventListener("click", () => {
    void controller.apply();
  });

  el<HTMLButtonElement>("save").addEventListener("click", () => {
    const outDir = el<HTMLInputElement>("out-dir").value.trim() || undefined;
    controller.saveAndReport(outDir).catch((err) => controller.note(String(err)));
  });
});
