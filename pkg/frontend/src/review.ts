/** NL proposal review: request a change set, preview it with diff styling
 * before anything is committed, then accept or reject. Rejecting restores
 * the pre-proposal graph exactly (the server never applied it); accepting
 * commits and hands styling duty back to change tracking. Preview styling
 * comes only from the server's diff: no optimistic rendering. */

import { ApiError, type ApiClient } from "./api.js";
import type { TrackChangesController } from "./trackChanges.js";
import type { GraphDiffDoc, ProposalDoc } from "./types.js";

export type ReviewPhase = "idle" | "pending" | "stale" | "error";

export interface ReviewView {
  /** Render the proposed elements in added/deleted styling pre-acceptance. */
  showPreview(diff: GraphDiffDoc, proposal: ProposalDoc): void;
  clearPreview(): void;
  showError(message: string): void;
  /** Stale proposal: the graph moved underneath; prompt a refresh. */
  showConflict(message: string): void;
}

export class ProposalReviewController {
  phase: ReviewPhase = "idle";
  proposal: ProposalDoc | null = null;

  constructor(
    private api: ApiClient,
    private sessionId: string,
    private view: ReviewView,
    private tracker?: TrackChangesController,
  ) {}

  async propose(request: string): Promise<ProposalDoc | null> {
    if (this.phase === "pending") {
      this.view.showError("a proposal is already pending; accept or reject it first");
      return null;
    }
    try {
      const proposal = await this.api.propose(this.sessionId, request);
      this.proposal = proposal;
      this.phase = "pending";
      this.view.showPreview(proposal.diff, proposal);
      return proposal;
    } catch (err) {
      this.phase = "error";
      this.view.showError(err instanceof Error ? err.message : String(err));
      return null;
    }
  }

  async accept(): Promise<boolean> {
    if (this.phase !== "pending") return false;
    try {
      await this.api.acceptProposal(this.sessionId);
    } catch (err) {
      if (err instanceof ApiError && err.code === "stale_proposal") {
        this.phase = "stale";
        this.view.showConflict(err.message);
        return false;
      }
      this.phase = "error";
      this.view.showError(err instanceof Error ? err.message : String(err));
      return false;
    }
    this.phase = "idle";
    this.proposal = null;
    this.view.clearPreview();
    // under change tracking the committed edit keeps its diff styling
    await this.tracker?.refresh();
    return true;
  }

  async reject(): Promise<boolean> {
    if (this.phase !== "pending" && this.phase !== "stale") return false;
    await this.api.rejectProposal(this.sessionId);
    this.phase = "idle";
    this.proposal = null;
    this.view.clearPreview();
    await this.tracker?.refresh();
    return true;
  }
}
