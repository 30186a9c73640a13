// Side-by-side preview iframes. Reloads happen only when the server says
// the applied selection actually changed.

import type { ApplyResult, PreviewUrls } from "./types.js";

export interface FrameLike {
  src: string;
}

export class PreviewPanes {
  reloads = { original: 0, simplified: 0 };
  private bust = 0;

  constructor(
    private original: FrameLike,
    private simplified: FrameLike,
  ) {}

  init(urls: PreviewUrls): void {
    this.original.src = urls.original;
    this.simplified.src = urls.simplified;
  }

  // Returns the number of frames reloaded (0 or 2).
  applyResult(result: ApplyResult): number {
    if (!result.changed) return 0;
    this.bust += 1;
    this.original.src = this.withBust(result.previewUrls.original);
    this.simplified.src = this.withBust(result.previewUrls.simplified);
    this.reloads.original += 1;
    this.reloads.simplified += 1;
    return 2;
  }

  private withBust(url: string): string {
    // the encoded original URL never contains a literal '?', so the replay
    // server drops this query before resolving
    return `${url}${url.includes("?") ? "&" : "?"}r=${this.bust}`;
  }
}
