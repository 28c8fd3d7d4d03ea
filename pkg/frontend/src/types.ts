// Mirrors the session API payloads. The client renders these verbatim and
// never recomputes analysis results.

export interface NavTarget {
  file: string;
  line: number;
}

export interface TableRow {
  line: number;
  occurrence: number;
  occurrence_count: number;
  display_name: string;
  kind: string;
  values: (string | null)[];
  merge_spans: [number, number][];
  colors: string[];
  nav_target: NavTarget;
}

export interface Table {
  frame: string;
  frame_index: number;
  columns: string[];
  rows: TableRow[];
}

export interface RepresentativeCard {
  patch_id: string;
  replacement: string;
  distance_to_buggy: number;
  original_rank: number;
  apr_score: number | null;
  cluster_id: string;
  cluster_size: number;
}

export interface ClusterSummary {
  cluster_id: string;
  representative: string | null;
  size: number;
  member_ids: string[];
}

export interface SessionView {
  session_id: string;
  bug_id: string;
  source: string;
  buggy_line: number;
  buggy_statement: string;
  representatives: RepresentativeCard[];
  clusters: ClusterSummary[];
  tables: Table[];
  active_count: number;
  excluded_ids: string[];
  breadcrumb: string[];
  history: Record<string, string>[];
  selection: string | null;
}

export interface BugSummary {
  bug_id: string;
  root_cause: string;
  buggy_line: number;
  buggy_statement: string;
  patch_count: number;
}

export interface SelectResult {
  session_id: string;
  patch_id: string;
  matches_correct: boolean;
  patched_source: string;
}

export type ActionKind = "explore" | "exclude" | "select";

/** Validate an untrusted payload; returns problems (empty when valid). */
export function validateSessionView(payload: unknown): string[] {
  const problems: string[] = [];
  const p = payload as Partial<SessionView> | null;
  if (!p || typeof p !== "object") return ["payload is not an object"];
  if (typeof p.session_id !== "string") problems.push("missing session_id");
  if (typeof p.source !== "string") problems.push("missing source");
  if (typeof p.buggy_line !== "number") problems.push("missing buggy_line");
  if (!Array.isArray(p.representatives)) problems.push("missing representatives");
  if (!Array.isArray(p.clusters)) problems.push("missing clusters");
  if (!Array.isArray(p.tables)) {
    problems.push("missing tables");
  } else {
    p.tables.forEach((t, i) => {
      if (!Array.isArray(t.columns)) problems.push(`table ${i}: missing columns`);
      if (!Array.isArray(t.rows)) {
        problems.push(`table ${i}: missing rows`);
        return;
      }
      t.rows.forEach((r, j) => {
        if (!Array.isArray(r.values) || !Array.isArray(r.colors) || !Array.isArray(r.merge_spans)) {
          problems.push(`table ${i} row ${j}: malformed row`);
        } else if (r.values.length !== r.colors.length) {
          problems.push(`table ${i} row ${j}: values/colors length mismatch`);
        }
      });
    });
  }
  return problems;
}
