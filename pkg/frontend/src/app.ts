// Session controller: server-authoritative state, one in-flight mutation
// at a time. Cascaded checkbox changes always come back from the server;
// a revision conflict refetches instead of guessing.

import { ApiClient, ApiError } from "./api.js";
import { PreviewPanes } from "./preview.js";
import { renderReport } from "./report.js";
import { renderTree } from "./tree.js";
import type { SessionState } from "./types.js";

export interface ControllerView {
  doc: Document;
  tree: HTMLElement;
  code: HTMLElement;
  report: HTMLElement;
  status: HTMLElement;
  previews: PreviewPanes;
}

export class SessionController {
  state: SessionState | null = null;
  busy = false;

  constructor(
    private api: ApiClient,
    private view: ControllerView,
  ) {}

  note(message: string): void {
    this.view.status.textContent = message;
  }

  async createSession(snapshotId: string): Promise<void> {
    this.state = await this.api.createSession(snapshotId);
    this.view.previews.init(this.state.previewUrls);
    this.renderTree();
    this.note(`analyzing ${this.state.elements.length} script elements`);
  }

  async attach(sessionId: string): Promise<void> {
    this.state = await this.api.getState(sessionId);
    this.view.previews.init(this.state.previewUrls);
    this.renderTree();
  }

  renderTree(): void {
    if (!this.state) return;
    const tree = renderTree(this.view.doc, this.state, {
      onToggle: (id, enabled) => void this.toggle(id, enabled),
      onInspect: (id) => void this.inspect(id),
      onSelectAll: (enabled) => void this.selectAll(enabled),
    });
    this.view.tree.replaceChildren(tree);
  }

  private applyServerSelection(selection: Record<string, boolean>, revision: number): void {
    if (!this.state) return;
    this.state.revision = revision;
    this.state.selection = selection;
    for (const el of this.state.elements) {
      el.enabled = selection[el.id] ?? el.enabled;
    }
    this.renderTree();
  }

  async toggle(elementId: string, enabled: boolean): Promise<void> {
    if (!this.state || this.busy) {
      this.renderTree(); // snap the checkbox back to confirmed state
      return;
    }
    this.busy = true;
    try {
      const result = await this.api.toggle(
        this.state.sessionId,
        elementId,
        enabled,
        this.state.revision,
      );
      this.applyServerSelection(result.selection, result.revision);
      const cascaded = Object.keys(result.delta).length;
      if (cascaded > 1) this.note(`${cascaded} elements changed (dependencies followed)`);
    } catch (err) {
      await this.recover(err);
    } finally {
      this.busy = false;
    }
  }

  async selectAll(enabled: boolean): Promise<void> {
    if (!this.state || this.busy) return;
    this.busy = true;
    try {
      let revision = this.state.revision;
      let selection = this.state.selection;
      for (const el of this.state.elements) {
        if (selection[el.id] === enabled) continue;
        const result = await this.api.toggle(this.state.sessionId, el.id, enabled, revision);
        revision = result.revision;
        selection = result.selection;
      }
      this.applyServerSelection(selection, revision);
    } catch (err) {
      await this.recover(err);
    } finally {
      this.busy = false;
    }
  }

  async apply(): Promise<void> {
    if (!this.state || this.busy) return;
    this.busy = true;
    try {
      const result = await this.api.apply(this.state.sessionId, this.state.revision);
      const reloaded = this.view.previews.applyResult(result);
      this.note(reloaded ? "previews reloaded" : "selection unchanged since last apply");
    } catch (err) {
      await this.recover(err);
    } finally {
      this.busy = false;
    }
  }

  async saveAndReport(outDir?: string): Promise<void> {
    if (!this.state) return;
    if (outDir) {
      const saved = await this.api.save(this.state.sessionId, outDir);
      this.note(`saved to ${saved.paths["html"]}`);
    }
    const report = await this.api.report(this.state.sessionId);
    this.view.report.replaceChildren(renderReport(this.view.doc, report));
  }

  async inspect(elementId: string): Promise<void> {
    if (!this.state) return;
    const code = await this.api.elementCode(this.state.sessionId, elementId);
    this.view.code.textContent = code || "(empty)";
  }

  private async recover(err: unknown): Promise<void> {
    if (err instanceof ApiError && err.isConflict && this.state) {
      this.state = await this.api.getState(this.state.sessionId);
      this.renderTree();
      this.note("selection changed elsewhere; view refreshed");
      return;
    }
    this.note(err instanceof Error ? err.message : String(err));
    throw err;
  }
}
