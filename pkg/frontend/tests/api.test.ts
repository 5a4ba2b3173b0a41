import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { FakeServer, emptyGraph } from "./fakeServer.js";

describe("api client", () => {
  it("surfaces the error envelope as ApiError with the server code", async () => {
    const server = new FakeServer(emptyGraph());
    const api = new ApiClient("http://fake", server.fetch);
    await expect(api.diff("s1", "ghost")).rejects.toMatchObject({
      status: 404,
      code: "unknown_element",
    });
    await expect(api.acceptProposal("s1")).rejects.toBeInstanceOf(ApiError);
  });

  it("graph and graphText agree on content", async () => {
    const server = new FakeServer(emptyGraph());
    const api = new ApiClient("http://fake", server.fetch);
    const parsed = await api.graph("s1");
    const raw = await api.graphText("s1");
    expect(JSON.parse(raw)).toEqual(parsed);
  });

  it("builds export and event urls off the session", () => {
    const api = new ApiClient("http://h:1");
    expect(api.eventsUrl("abc")).toBe("http://h:1/sessions/abc/events");
    expect(api.exportCsvUrl("abc", { kind: "results" }))
      .toBe("http://h:1/sessions/abc/export.csv?kind=results");
  });
});
