// Shapes of the session API documents.

export type Kind = "inline" | "external" | "recursive";
export type CriticalityName = "critical" | "noncritical";

export interface ElementInfo {
  id: string;
  kind: Kind;
  name: string;
  src: string | null;
  docRange: [number, number] | null;
  category: string;
  confidence: number;
  criticality: CriticalityName;
  byteSize: number;
  parents: string[];
  bodyMissing: boolean;
  enabled: boolean;
}

export interface PreviewUrls {
  original: string;
  simplified: string;
}

export interface SessionState {
  sessionId: string;
  snapshotId: string;
  indexUrl: string;
  revision: number;
  elements: ElementInfo[];
  groups: string[][];
  edges: [string, string][];
  selection: Record<string, boolean>;
  previewUrls: PreviewUrls;
  warnings: string[];
}

export interface ToggleResult {
  revision: number;
  delta: Record<string, boolean>;
  selection: Record<string, boolean>;
}

export interface ApplyResult {
  revision: number;
  changed: boolean;
  previewUrls: PreviewUrls;
}

export interface ReportCardData {
  requestCount: number;
  totalBytes: number;
  jsRequestCount: number;
  jsBytes: number;
  scriptTagCount: number;
}

export type Reduction = number | "n/a";

export interface BlockedEntry {
  url: string;
  parents: string[];
  category: string;
  reason: string;
}

export interface ReportData {
  before: ReportCardData;
  after: ReportCardData;
  reduction: Record<string, Reduction>;
  similarity: number;
  blockReport: { blocked: BlockedEntry[] };
}

export interface SavePaths {
  paths: Record<string, string>;
}
