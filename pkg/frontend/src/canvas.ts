/** SVG graph canvas with a small force-directed layout and pinnable nodes.
 * Layout is presentation only and never leaves the browser; all styling is
 * looked up from the active diff. */

import { neutralStyle, styleFor, type Palette } from "./styling.js";
import type { GraphDiffDoc, GraphDoc } from "./types.js";

interface LayoutNode {
  id: number;
  label: string;
  x: number;
  y: number;
  vx: number;
  vy: number;
  pinned: boolean;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function shortLabel(iri: string): string {
  const tail = iri.split(/[#/]/).filter(Boolean).pop() ?? iri;
  return tail.length > 24 ? tail.slice(0, 23) + "…" : tail;
}

export class GraphCanvas {
  private nodes = new Map<number, LayoutNode>();
  private graph: GraphDoc | null = null;
  private diff: GraphDiffDoc | null = null;
  palette: Palette = "default";
  readonly svg: SVGSVGElement;

  constructor(
    private container: HTMLElement,
    private width = 800,
    private height = 520,
  ) {
    this.svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    this.svg.setAttribute("class", "pq-canvas");
    container.appendChild(this.svg);
  }

  setGraph(graph: GraphDoc): void {
    this.graph = graph;
    const seen = new Set<number>();
    graph.nodes.forEach((node, index) => {
      seen.add(node.id);
      if (!this.nodes.has(node.id)) {
        const angle = (index / Math.max(graph.nodes.length, 1)) * 2 * Math.PI;
        this.nodes.set(node.id, {
          id: node.id,
          label: shortLabel(node.class),
          x: this.width / 2 + Math.cos(angle) * 120,
          y: this.height / 2 + Math.sin(angle) * 120,
          vx: 0,
          vy: 0,
          pinned: false,
        });
      } else {
        this.nodes.get(node.id)!.label = shortLabel(node.class);
      }
    });
    for (const id of [...this.nodes.keys()]) {
      if (!seen.has(id)) this.nodes.delete(id);
    }
    this.settle(120);
    this.render();
  }

  setDiff(diff: GraphDiffDoc | null): void {
    this.diff = diff;
    this.render();
  }

  pin(nodeId: number, x: number, y: number): void {
    const node = this.nodes.get(nodeId);
    if (!node) return;
    node.x = x;
    node.y = y;
    node.pinned = true;
    this.render();
  }

  unpin(nodeId: number): void {
    const node = this.nodes.get(nodeId);
    if (node) node.pinned = false;
  }

  /** Plain spring/charge simulation; a few dozen steps settle small graphs. */
  settle(steps: number): void {
    if (!this.graph) return;
    const nodes = [...this.nodes.values()];
    const edges = this.graph.edges;
    for (let step = 0; step < steps; step++) {
      for (const a of nodes) {
        if (a.pinned) continue;
        let fx = (this.width / 2 - a.x) * 0.01;
        let fy = (this.height / 2 - a.y) * 0.01;
        for (const b of nodes) {
          if (a === b) continue;
          const dx = a.x - b.x;
          const dy = a.y - b.y;
          const dist2 = Math.max(dx * dx + dy * dy, 25);
          const push = 6000 / dist2;
          fx += (dx / Math.sqrt(dist2)) * push;
          fy += (dy / Math.sqrt(dist2)) * push;
        }
        for (const edge of edges) {
          if (edge.tail !== a.id && edge.head !== a.id) continue;
          const otherId = edge.tail === a.id ? edge.head : edge.tail;
          const other = this.nodes.get(otherId);
          if (!other) continue;
          const dx = other.x - a.x;
          const dy = other.y - a.y;
          const dist = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
          const pull = (dist - 140) * 0.02;
          fx += (dx / dist) * pull;
          fy += (dy / dist) * pull;
        }
        a.vx = (a.vx + fx) * 0.6;
        a.vy = (a.vy + fy) * 0.6;
        a.x = Math.min(Math.max(a.x + a.vx, 30), this.width - 30);
        a.y = Math.min(Math.max(a.y + a.vy, 30), this.height - 30);
      }
    }
  }

  private styleOf(kind: "node" | "edge" | "subquery", id: number) {
    if (!this.diff) return neutralStyle(kind, id, this.palette);
    try {
      return styleFor(this.diff, kind, id, this.palette);
    } catch {
      return neutralStyle(kind, id, this.palette);
    }
  }

  render(): void {
    if (!this.graph) return;
    this.svg.replaceChildren();

    for (const edge of this.graph.edges) {
      const tail = this.nodes.get(edge.tail);
      const head = this.nodes.get(edge.head);
      if (!tail || !head) continue;
      const style = this.styleOf("edge", edge.id);
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(tail.x));
      line.setAttribute("y1", String(tail.y));
      line.setAttribute("x2", String(head.x));
      line.setAttribute("y2", String(head.y));
      line.setAttribute("stroke", style.color);
      line.setAttribute("stroke-width", "2");
      line.setAttribute("class", `pq-edge ${style.cssClass}`);
      line.setAttribute("data-edge-id", String(edge.id));
      this.svg.appendChild(line);
    }

    for (const node of this.graph.nodes) {
      const layout = this.nodes.get(node.id);
      if (!layout) continue;
      const style = this.styleOf("node", node.id);
      const group = document.createElementNS(SVG_NS, "g");
      group.setAttribute("class", `pq-node ${style.cssClass}`);
      group.setAttribute("data-node-id", String(node.id));

      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(layout.x));
      circle.setAttribute("cy", String(layout.y));
      circle.setAttribute("r", "22");
      circle.setAttribute("fill", "#ffffff");
      circle.setAttribute("stroke", style.color);
      circle.setAttribute("stroke-width", "3");
      group.appendChild(circle);

      const text = document.createElementNS(SVG_NS, "text");
      text.setAttribute("x", String(layout.x));
      text.setAttribute("y", String(layout.y + 38));
      text.setAttribute("text-anchor", "middle");
      text.textContent = `${node.id}: ${layout.label}`;
      group.appendChild(text);

      if (style.badge) {
        const badge = document.createElementNS(SVG_NS, "text");
        badge.setAttribute("x", String(layout.x + 18));
        badge.setAttribute("y", String(layout.y - 16));
        badge.setAttribute("class", "pq-badge");
        badge.textContent = style.badge;
        group.appendChild(badge);
      }
      this.svg.appendChild(group);
    }

    for (const sq of this.graph.subqueries) {
      const anchor = this.nodes.get(sq.node);
      if (!anchor) continue;
      const style = this.styleOf("subquery", sq.id);
      const label = document.createElementNS(SVG_NS, "text");
      const offset = 52 + 14 * (sq.id % 4);
      label.setAttribute("x", String(anchor.x));
      label.setAttribute("y", String(anchor.y + offset));
      label.setAttribute("text-anchor", "middle");
      label.setAttribute("fill", style.color);
      label.setAttribute("class", `pq-subquery ${style.cssClass}`);
      label.setAttribute("data-subquery-id", String(sq.id));
      const cond = sq.condition
        ? ` ${sq.condition.negated ? "not " : ""}${sq.condition.operator} ${sq.condition.operand}`
        : "";
      label.textContent =
        `${style.badge ? style.badge + " " : ""}${sq.kind}: ${shortLabel(sq.property)}${cond}`;
      this.svg.appendChild(label);
    }
  }
}
