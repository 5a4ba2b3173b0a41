/** Change tracking: while on, every edit re-requests the diff against the
 * auto-created baseline snapshot and restyles the canvas and charts; off
 * clears all styling. */

import type { ApiClient } from "./api.js";
import type { GraphDiffDoc } from "./types.js";

export const BASELINE_TAG = "track-baseline";

export interface TrackChangesView {
  /** Restyle everything from a diff, or clear styling when null. */
  applyDiff(diff: GraphDiffDoc | null): void;
}

export class TrackChangesController {
  private tracking = false;

  constructor(
    private api: ApiClient,
    private sessionId: string,
    private view: TrackChangesView,
  ) {}

  get isTracking(): boolean {
    return this.tracking;
  }

  async toggle(): Promise<boolean> {
    if (this.tracking) {
      this.tracking = false;
      this.view.applyDiff(null);
      return false;
    }
    await this.api.snapshot(this.sessionId, BASELINE_TAG);
    this.tracking = true;
    await this.refresh();
    return true;
  }

  /** Call after every graph mutation (and after accepting a proposal). */
  async refresh(): Promise<GraphDiffDoc | null> {
    if (!this.tracking) return null;
    const { diff } = await this.api.diff(this.sessionId, BASELINE_TAG, "current");
    this.view.applyDiff(diff);
    return diff;
  }
}
