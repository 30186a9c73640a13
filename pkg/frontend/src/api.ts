// Thin typed client for the session API. The fetch implementation is
// injectable so tests can stub the server.

import type {
  ApplyResult,
  ReportData,
  SavePaths,
  SessionState,
  ToggleResult,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      let code = "error";
      let message = `${resp.status}`;
      try {
        const doc = await resp.json();
        code = doc.code ?? code;
        message = doc.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, code, message);
    }
    return (await resp.json()) as T;
  }

  createSession(snapshotId: string, prefsPath?: string, rulesPath?: string): Promise<SessionState> {
    return this.request<SessionState>("POST", "/sessions", {
      snapshotId,
      prefsPath,
      rulesPath,
    });
  }

  getState(sessionId: string): Promise<SessionState> {
    return this.request<SessionState>("GET", `/sessions/${sessionId}`);
  }

  toggle(
    sessionId: string,
    elementId: string,
    enabled: boolean,
    revision: number,
  ): Promise<ToggleResult> {
    return this.request<ToggleResult>("POST", `/sessions/${sessionId}/toggle`, {
      elementId,
      enabled,
      revision,
    });
  }

  apply(sessionId: string, revision: number): Promise<ApplyResult> {
    return this.request<ApplyResult>("POST", `/sessions/${sessionId}/apply`, { revision });
  }

  save(sessionId: string, outDir: string): Promise<SavePaths> {
    return this.request<SavePaths>("POST", `/sessions/${sessionId}/save`, { outDir });
  }

  report(sessionId: string): Promise<ReportData> {
    return this.request<ReportData>("GET", `/sessions/${sessionId}/report`);
  }

  async elementCode(sessionId: string, elementId: string): Promise<string> {
    const resp = await this.fetchFn(
      `${this.baseUrl}/sessions/${sessionId}/elements/${elementId}/code`,
      { method: "GET" },
    );
    if (!resp.ok) {
      throw new ApiError(resp.status, "error", `code fetch failed: ${resp.status}`);
    }
    return await resp.text();
  }
}
