// Shared test scaffolding: fake session documents and a live-API harness
// that runs the real backend CLI against a fixture snapshot.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { PreviewPanes, type FrameLike } from "../src/preview.js";
import type { SessionState } from "../src/types.js";

export function fakeState(overrides: Partial<SessionState> = {}): SessionState {
  const elements = [
    {
      id: "ex-aaa",
      kind: "external" as const,
      name: "app.js",
      src: "https://x.test/app.js",
      docRange: [10, 60] as [number, number],
      category: "Unknown",
      confidence: 0,
      criticality: "critical" as const,
      byteSize: 1200,
      parents: [],
      bodyMissing: false,
      enabled: true,
    },
    {
      id: "ex-bbb",
      kind: "external" as const,
      name: "tracker.js",
      src: "https://t.test/tracker.js",
      docRange: [70, 130] as [number, number],
      category: "Analytics",
      confidence: 0.95,
      criticality: "noncritical" as const,
      byteSize: 800,
      parents: [],
      bodyMissing: false,
      enabled: false,
    },
    {
      id: "re-ccc",
      kind: "recursive" as const,
      name: "pixel.js",
      src: "https://t.test/pixel.js",
      docRange: null,
      category: "Analytics",
      confidence: 0.95,
      criticality: "noncritical" as const,
      byteSize: 90,
      parents: ["ex-bbb"],
      bodyMissing: false,
      enabled: false,
    },
  ];
  return {
    sessionId: "sess-test",
    snapshotId: "snap-test",
    indexUrl: "https://x.test/index.html",
    revision: 1,
    elements,
    groups: [["ex-aaa"], ["ex-bbb", "re-ccc"]],
    edges: [["ex-bbb", "re-ccc"]],
    selection: { "ex-aaa": true, "ex-bbb": false, "re-ccc": false },
    previewUrls: {
      original: "http://127.0.0.1:1/v/snap-test/idx",
      simplified: "http://127.0.0.1:2/v/snap-test/idx",
    },
    warnings: [],
    ...overrides,
  };
}

export class StubFrame implements FrameLike {
  sets: string[] = [];
  private _src = "";

  get src(): string {
    return this._src;
  }

  set src(value: string) {
    this._src = value;
    this.sets.push(value);
  }
}

export function stubPreviews(): { panes: PreviewPanes; original: StubFrame; simplified: StubFrame } {
  const original = new StubFrame();
  const simplified = new StubFrame();
  return { panes: new PreviewPanes(original, simplified), original, simplified };
}

export async function waitFor(
  predicate: () => boolean,
  timeoutMs = 5000,
  stepMs = 25,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (predicate()) return;
    await new Promise((resolve) => setTimeout(resolve, stepMs));
  }
  throw new Error("waitFor timed out");
}

export interface Backend {
  baseUrl: string;
  snapshotId: string;
  stop(): void;
}

// Spawns `pagetrim session` on an ephemeral port over a freshly built
// fixture store; resolves once the API announces its URL.
export async function startBackend(): Promise<Backend> {
  const storeDir = mkdtempSync(join(tmpdir(), "pagetrim-ui-"));
  // vitest runs with cwd at the frontend package root
  const fixtureScript = join(process.cwd(), "tests", "make_fixture.py");
  const build = spawnSync("python3", [fixtureScript, storeDir], { encoding: "utf-8" });
  if (build.status !== 0) {
    throw new Error(`fixture build failed: ${build.stderr}`);
  }
  const snapshotId = build.stdout.trim();

  const child: ChildProcess = spawn(
    "python3",
    ["-m", "pagetrim.cli", "session", "--port", "0", "--store", storeDir],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  const baseUrl = await new Promise<string>((resolve, reject) => {
    let buffer = "";
    const timer = setTimeout(() => reject(new Error("backend start timeout")), 30000);
    child.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/listening on (http:\/\/[^\s]+)/);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]);
      }
    });
    child.on("exit", (code) => reject(new Error(`backend exited early (${code})`)));
  });
  return {
    baseUrl,
    snapshotId,
    stop() {
      child.kill("SIGTERM");
      rmSync(storeDir, { recursive: true, force: true });
    },
  };
}
