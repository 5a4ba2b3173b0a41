/** Typed client for the protoquery HTTP API. All state lives server-side;
 * this wrapper only shapes requests and surfaces the error envelope. */

import type {
  ApiErrorBody,
  ChartSpecDoc,
  EditOperation,
  GraphDiffDoc,
  GraphDoc,
  InstanceDiffDoc,
  ProposalDoc,
  SessionInfoDoc,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let code = "http_error";
      let message = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as ApiErrorBody;
        code = body.error.code;
        message = body.error.message;
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(response.status, code, message);
    }
    return response;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.request(path, init);
    return (await response.json()) as T;
  }

  private post<T>(path: string, payload?: unknown): Promise<T> {
    return this.json<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload ?? {}),
    });
  }

  addOntology(document: string, format = "turtle") {
    return this.post<{ ontology: string; classes: number; links: number }>(
      "/ontologies",
      { document, format },
    );
  }

  createSession(ontology: string, settings: Record<string, unknown> = {}) {
    return this.post<{ session: string; version_tag: string }>("/sessions", {
      ontology,
      settings,
    });
  }

  sessionInfo(sessionId: string) {
    return this.json<SessionInfoDoc>(`/sessions/${sessionId}`);
  }

  async graph(sessionId: string, target = "current") {
    return this.json<{ version_tag: string; graph: GraphDoc }>(
      `/sessions/${sessionId}/graph?target=${encodeURIComponent(target)}`,
    );
  }

  /** Raw response body; used where byte-level comparison matters. */
  async graphText(sessionId: string, target = "current"): Promise<string> {
    const response = await this.request(
      `/sessions/${sessionId}/graph?target=${encodeURIComponent(target)}`,
    );
    return response.text();
  }

  edit(sessionId: string, operations: EditOperation[]) {
    return this.json<{ results: Record<string, unknown>[]; version_tag: string }>(
      `/sessions/${sessionId}/graph`,
      {
        method: "PATCH",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ operations }),
      },
    );
  }

  snapshot(sessionId: string, tag: string) {
    return this.post<{ tag: string; version_tag: string }>(
      `/sessions/${sessionId}/snapshots/${encodeURIComponent(tag)}`,
    );
  }

  diff(sessionId: string, left: string, right = "current") {
    return this.json<{ left: string; right: string; diff: GraphDiffDoc }>(
      `/sessions/${sessionId}/diff?left=${encodeURIComponent(left)}&right=${encodeURIComponent(right)}`,
    );
  }

  instanceDiff(sessionId: string, left: string, right = "current") {
    return this.json<{ diff: InstanceDiffDoc }>(
      `/sessions/${sessionId}/instances/diff?left=${encodeURIComponent(left)}&right=${encodeURIComponent(right)}`,
    );
  }

  chart(
    sessionId: string,
    values: number[],
    options: { target?: string; left?: string; right?: string } = {},
  ) {
    const params = new URLSearchParams({ values: values.join(",") });
    if (options.target) params.set("target", options.target);
    if (options.left) params.set("left", options.left);
    if (options.right) params.set("right", options.right);
    return this.json<ChartSpecDoc>(`/sessions/${sessionId}/chart?${params}`);
  }

  propose(sessionId: string, request: string) {
    return this.post<ProposalDoc>(`/sessions/${sessionId}/nl`, { request });
  }

  acceptProposal(sessionId: string) {
    return this.post<{ version_tag: string }>(`/sessions/${sessionId}/nl/accept`);
  }

  rejectProposal(sessionId: string) {
    return this.post<{ version_tag: string }>(`/sessions/${sessionId}/nl/reject`);
  }

  exportCsvUrl(sessionId: string, params: Record<string, string>): string {
    return `${this.baseUrl}/sessions/${sessionId}/export.csv?${new URLSearchParams(params)}`;
  }

  eventsUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/events`;
  }
}
