/** Live result counts from the server-sent event stream. The EventSource
 * constructor is injectable so tests can feed scripted streams. */

import type { CountEventDoc } from "./types.js";

export interface EventSourceLike {
  onmessage: ((event: { data: string }) => void) | null;
  onerror: ((event: unknown) => void) | null;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export class LiveCountClient {
  private source: EventSourceLike | null = null;

  constructor(
    private url: string,
    private onEvent: (event: CountEventDoc) => void,
    private factory: EventSourceFactory = (u) =>
      new EventSource(u) as unknown as EventSourceLike,
  ) {}

  start(): void {
    this.stop();
    this.source = this.factory(this.url);
    this.source.onmessage = (message) => {
      try {
        this.onEvent(JSON.parse(message.data) as CountEventDoc);
      } catch {
        // keepalives and malformed frames are ignored
      }
    };
  }

  stop(): void {
    this.source?.close();
    this.source = null;
  }
}

export function formatCountEvent(event: CountEventDoc): string {
  if (event.type === "error") return `count unavailable (${event.error ?? "error"})`;
  return `${event.count} results @ ${event.version_tag}`;
}
