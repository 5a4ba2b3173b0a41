/** Overview chart rendering. One DOM series block per ChartSpec series, so
 * diff mode shows exactly two comparable series over the same axes. */

import type { ChartSpecDoc, SeriesDoc } from "./types.js";

const SERIES_COLORS = ["#1565c0", "#ef6c00"];

export function renderChart(container: HTMLElement, spec: ChartSpecDoc): void {
  container.replaceChildren();
  const panel = document.createElement("div");
  panel.className = `pq-chart pq-chart-${spec.chart}`;
  panel.dataset.chart = spec.chart;

  const caption = document.createElement("div");
  caption.className = "pq-chart-caption";
  caption.textContent = `${spec.chart} — ${String(spec.axes["x"] ?? "")}`;
  panel.appendChild(caption);

  spec.series.forEach((series, index) => {
    const block = document.createElement("div");
    block.className = "pq-series";
    block.dataset.name = series.name;
    const color = SERIES_COLORS[index % SERIES_COLORS.length];

    const title = document.createElement("div");
    title.className = "pq-series-name";
    title.textContent = series.name;
    title.style.color = color;
    block.appendChild(title);

    if (spec.chart === "histogram") renderHistogram(block, series, color);
    else if (spec.chart === "categories") renderCategories(block, series, color);
    else if (spec.chart === "scatter") renderScatter(block, series, color);
    else renderHeatmap(block, series);

    panel.appendChild(block);
  });
  container.appendChild(panel);
}

function renderHistogram(block: HTMLElement, series: SeriesDoc, color: string): void {
  const counts = series.data["counts"] as number[];
  const labels = series.data["labels"] as string[] | undefined;
  const edges = series.data["edges"] as number[];
  const max = Math.max(...counts, 1);
  const bars = document.createElement("div");
  bars.className = "pq-bars";
  counts.forEach((count, i) => {
    const bar = document.createElement("div");
    bar.className = "pq-bar";
    bar.style.height = `${Math.round((count / max) * 100)}%`;
    bar.style.background = color;
    bar.title = labels
      ? `${labels[i]} – ${labels[i + 1]}: ${count}`
      : `${edges[i]} – ${edges[i + 1]}: ${count}`;
    bar.dataset.count = String(count);
    bars.appendChild(bar);
  });
  block.appendChild(bars);
}

function renderCategories(block: HTMLElement, series: SeriesDoc, color: string): void {
  const categories = series.data["categories"] as { value: string; count: number }[];
  const other = series.data["other"] as number;
  const list = document.createElement("div");
  list.className = "pq-categories";
  const max = Math.max(...categories.map((c) => c.count), other, 1);
  const row = (value: string, count: number) => {
    const entry = document.createElement("div");
    entry.className = "pq-category";
    entry.dataset.value = value;
    entry.dataset.count = String(count);
    const bar = document.createElement("span");
    bar.className = "pq-category-bar";
    bar.style.width = `${Math.round((count / max) * 100)}%`;
    bar.style.background = color;
    const label = document.createElement("span");
    label.textContent = `${value}: ${count}`;
    entry.append(bar, label);
    return entry;
  };
  for (const category of categories) list.appendChild(row(category.value, category.count));
  if (other > 0) list.appendChild(row("(other)", other));
  block.appendChild(list);
}

function renderScatter(block: HTMLElement, series: SeriesDoc, color: string): void {
  const points = series.data["points"] as [number, number][];
  const svgNs = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNs, "svg");
  svg.setAttribute("viewBox", "0 0 200 120");
  svg.setAttribute("class", "pq-scatter");
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  const [x0, x1] = [Math.min(...xs, 0), Math.max(...xs, 1)];
  const [y0, y1] = [Math.min(...ys, 0), Math.max(...ys, 1)];
  for (const [x, y] of points) {
    const dot = document.createElementNS(svgNs, "circle");
    dot.setAttribute("cx", String(5 + ((x - x0) / (x1 - x0 || 1)) * 190));
    dot.setAttribute("cy", String(115 - ((y - y0) / (y1 - y0 || 1)) * 110));
    dot.setAttribute("r", "3");
    dot.setAttribute("fill", color);
    dot.setAttribute("class", "pq-point");
    svg.appendChild(dot);
  }
  block.appendChild(svg);
}

function renderHeatmap(block: HTMLElement, series: SeriesDoc): void {
  const cells = series.data["cells"] as number[][];
  const max = Math.max(...cells.flat(), 1);
  const table = document.createElement("div");
  table.className = "pq-heatmap";
  for (const rowCells of [...cells].reverse()) {
    const row = document.createElement("div");
    row.className = "pq-heatmap-row";
    for (const count of rowCells) {
      const cell = document.createElement("span");
      cell.className = "pq-cell";
      cell.dataset.count = String(count);
      cell.style.opacity = String(count / max);
      row.appendChild(cell);
    }
    table.appendChild(row);
  }
  block.appendChild(table);
}
