/** Single-page wiring: session bootstrap, canvas, change tracking, charts,
 * instance diffs, the NL review box, and the live count footer. */

import { ApiClient } from "./api.js";
import { GraphCanvas } from "./canvas.js";
import { renderChart } from "./chartPanel.js";
import { LiveCountClient, formatCountEvent } from "./events.js";
import { renderInstanceDiff } from "./instanceList.js";
import { ProposalReviewController, type ReviewView } from "./review.js";
import type { Palette } from "./styling.js";
import { BASELINE_TAG, TrackChangesController } from "./trackChanges.js";
import type { GraphDiffDoc, ProposalDoc } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

export async function startApp(): Promise<void> {
  const base = (window as { PROTOQUERY_BASE?: string }).PROTOQUERY_BASE
    ?? `${location.protocol}//${location.host}`;
  const api = new ApiClient(base);
  const params = new URLSearchParams(location.search);
  const sessionId = params.get("session");
  if (!sessionId) {
    el("status").textContent =
      "no session: create one via the API and open ?session=<id>";
    return;
  }

  let palette: Palette = "default";
  const canvas = new GraphCanvas(el("canvas"));

  async function reloadGraph(): Promise<void> {
    const { graph, version_tag } = await api.graph(sessionId!);
    canvas.setGraph(graph);
    el("status").textContent = `graph ${version_tag}`;
  }

  const tracker = new TrackChangesController(api, sessionId, {
    applyDiff: (diff: GraphDiffDoc | null) => canvas.setDiff(diff),
  });

  const reviewView: ReviewView = {
    showPreview: async (diff: GraphDiffDoc, proposal: ProposalDoc) => {
      const { graph } = await api.graph(sessionId!, "proposed");
      canvas.setGraph(graph);
      canvas.setDiff(diff);
      el("review-log").textContent =
        `proposed: ${JSON.stringify(proposal.changeset)}\n` +
        proposal.repairs.map((r) => `repair: ${r.action} (${r.detail})`).join("\n");
      el("review-actions").hidden = false;
    },
    clearPreview: () => {
      el("review-actions").hidden = true;
      el("review-log").textContent = "";
      void reloadGraph().then(() => tracker.refresh());
    },
    showError: (message) => { el("review-log").textContent = `error: ${message}`; },
    showConflict: (message) => {
      el("review-log").textContent = `conflict: ${message} (reject and retry)`;
    },
  };
  const review = new ProposalReviewController(api, sessionId, reviewView, tracker);

  el<HTMLButtonElement>("track-toggle").addEventListener("click", async () => {
    const on = await tracker.toggle();
    el("track-toggle").textContent = on ? "tracking: on" : "tracking: off";
  });

  el<HTMLButtonElement>("palette-toggle").addEventListener("click", () => {
    palette = palette === "default" ? "colorblind" : "default";
    canvas.palette = palette;
    canvas.render();
    el("palette-toggle").textContent = `palette: ${palette}`;
  });

  el<HTMLFormElement>("nl-form").addEventListener("submit", async (event) => {
    event.preventDefault();
    const input = el<HTMLInputElement>("nl-input");
    if (input.value.trim()) await review.propose(input.value.trim());
  });
  el<HTMLButtonElement>("nl-accept").addEventListener("click", () => void review.accept());
  el<HTMLButtonElement>("nl-reject").addEventListener("click", () => void review.reject());

  el<HTMLFormElement>("chart-form").addEventListener("submit", async (event) => {
    event.preventDefault();
    const values = el<HTMLInputElement>("chart-values").value
      .split(",").map((v) => parseInt(v.trim(), 10)).filter((v) => !Number.isNaN(v));
    const overlay = el<HTMLInputElement>("chart-overlay").checked && tracker.isTracking;
    const spec = overlay
      ? await api.chart(sessionId!, values, { left: BASELINE_TAG, right: "current" })
      : await api.chart(sessionId!, values);
    renderChart(el("chart"), spec);
  });

  el<HTMLButtonElement>("instances-load").addEventListener("click", async () => {
    if (!tracker.isTracking) return;
    const { diff } = await api.instanceDiff(sessionId!, BASELINE_TAG);
    renderInstanceDiff(el("instances"), diff, palette);
  });

  const live = new LiveCountClient(api.eventsUrl(sessionId), (event) => {
    el("live-count").textContent = formatCountEvent(event);
  });
  live.start();

  await reloadGraph();
}

if (typeof document !== "undefined" && document.getElementById("canvas")) {
  void startApp();
}
