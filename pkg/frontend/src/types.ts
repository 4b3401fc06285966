/** Shapes of the session-server JSON responses the UI consumes. */

export interface SessionSummary {
  session_id: string;
  revision: number;
  summary: { node_count: number; leaf_count: number; labels_digest: string };
}

export interface TreeNode {
  id: number;
  parent: number | null;
  children: [number, number] | null;
  depth: number;
  size: number;
  criterion: number | null;
  feasible: boolean;
  rule_tag: string | null;
  split_point: number | null;
  manual: boolean;
  score_range: [number, number] | null;
  viewable: boolean;
}

export interface TreeDoc {
  revision: number;
  labels: number[];
  labels_digest: string;
  n: number;
  root_id: number;
  split_order: number[];
  config: Record<string, unknown>;
  nodes: TreeNode[];
}

export interface ViewRecord {
  node_id: number;
  size: number;
  depth: number;
  rule_tag: string | null;
  criterion: number | null;
  feasible: boolean;
  split_point: number | null;
  manual: boolean;
  score_range: [number, number];
  children: [number, number] | null;
  sample_indices: number[];
  coords: [number, number][];
  side: number[] | null;
  revision: number;
}

export interface DendrogramDoc {
  revision: number;
  linkage: [number, number, number, number][];
  labels: number[];
  class_labels: number[] | null;
}

export interface ApiError {
  status: number;
  code: string;
  message: string;
}
