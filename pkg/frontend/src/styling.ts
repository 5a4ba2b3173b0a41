/**
 * Diff styling: a pure function from (GraphDiff, palette) to element styles.
 * The server's diff is the only source of status; nothing here inspects the
 * graph itself.
 */

import type { DiffStatus, ElementKind, GraphDiffDoc } from "./types.js";

export type Palette = "default" | "colorblind";

export interface ElementStyle {
  kind: ElementKind;
  id: number;
  status: DiffStatus;
  color: string;
  cssClass: string;
  badge: string;
}

export class UnknownElementError extends Error {}

/** Palette tables. Default uses green/red; the colorblind palette swaps to
 * blue/orange and adds border badges so state never rides on hue alone. */
export const PALETTES: Record<Palette, Record<DiffStatus, string>> = {
  default: {
    added: "#2e7d32", // green
    deleted: "#c62828", // red
    changed: "#f9a825", // amber
    shared: "#9e9e9e", // neutral
  },
  colorblind: {
    added: "#1565c0", // blue
    deleted: "#ef6c00", // orange
    changed: "#6a1b9a",
    shared: "#9e9e9e",
  },
};

export const BADGES: Record<Palette, Partial<Record<DiffStatus, string>>> = {
  default: {},
  colorblind: { added: "+", deleted: "−", changed: "~" },
};

export function statusOf(
  diff: GraphDiffDoc,
  kind: ElementKind,
  id: number,
): DiffStatus {
  const sets =
    kind === "node" ? diff.nodes : kind === "edge" ? diff.edges : diff.subqueries;
  if (sets.added.includes(id)) return "added";
  if (sets.deleted.includes(id)) return "deleted";
  if (kind === "subquery" && diff.subqueries.changed.includes(id)) return "changed";
  if (sets.shared.includes(id)) return "shared";
  throw new UnknownElementError(
    `${kind} ${id} appears in neither graph version of this diff`,
  );
}

export function styleFor(
  diff: GraphDiffDoc,
  kind: ElementKind,
  id: number,
  palette: Palette = "default",
): ElementStyle {
  const status = statusOf(diff, kind, id);
  return {
    kind,
    id,
    status,
    color: PALETTES[palette][status],
    cssClass: `pq-${status}`,
    badge: BADGES[palette][status] ?? "",
  };
}

/** Neutral style used when change tracking is off. */
export function neutralStyle(kind: ElementKind, id: number, palette: Palette = "default"): ElementStyle {
  return {
    kind,
    id,
    status: "shared",
    color: PALETTES[palette].shared,
    cssClass: "pq-shared",
    badge: "",
  };
}
