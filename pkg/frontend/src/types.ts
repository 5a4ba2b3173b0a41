/**
 * Wire formats of the protoquery HTTP API, as consumed by this client.
 * The server is authoritative; these mirror its JSON payloads only.
 */

export type ElementKind = "node" | "edge" | "subquery";

export type DiffStatus = "added" | "deleted" | "changed" | "shared";

export interface ConditionDoc {
  operator: string;
  negated: boolean;
  operand: string | number | boolean;
}

export interface GraphDoc {
  format: string;
  version_tag: string;
  revision: number;
  nodes: { id: number; class: string }[];
  edges: { id: number; tail: number; link: string; head: number }[];
  subqueries: {
    id: number;
    node: number;
    property: string;
    kind: "constraint" | "value";
    condition: ConditionDoc | null;
    revision: number;
  }[];
}

export interface DiffSets {
  added: number[];
  deleted: number[];
  shared: number[];
}

export interface GraphDiffDoc {
  nodes: DiffSets;
  edges: DiffSets;
  subqueries: DiffSets & { changed: number[] };
}

export interface InstanceDiffDoc {
  added: string[][];
  removed: string[][];
  shared: string[][];
}

export interface SeriesDoc {
  name: string;
  data: Record<string, unknown>;
}

export interface ChartSpecDoc {
  chart: "histogram" | "categories" | "scatter" | "heatmap";
  series: SeriesDoc[];
  axes: Record<string, unknown>;
  parameters: Record<string, unknown>;
}

export interface ProposalDoc {
  request: string;
  changeset: Record<string, unknown>;
  repairs: { action: string; detail: string }[];
  diff: GraphDiffDoc;
  base_version_tag: string;
  proposed_version_tag: string;
}

export interface SessionInfoDoc {
  session: string;
  ontology: string;
  version_tag: string;
  settings: Record<string, unknown>;
  snapshots: string[];
  pending: boolean;
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}

export interface CountEventDoc {
  type: "count" | "error";
  version_tag: string;
  count?: number;
  error?: string;
}

export type EditOperation =
  | { op: "add_node"; class: string }
  | { op: "add_edge"; tail: number; link: string; head: number }
  | {
      op: "set_subquery";
      node: number;
      property: string;
      kind: "constraint" | "value";
      condition?: ConditionDoc;
    }
  | { op: "update_subquery"; subquery: number; condition: ConditionDoc }
  | { op: "remove"; kind: ElementKind; id: number };
