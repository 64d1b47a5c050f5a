import { describe, expect, it, vi } from "vitest";

import { ApiClient } from "./api";
import { Console, type View } from "./controller";
import faultsFixture from "./__fixtures__/faults.json";
import searchFixture from "./__fixtures__/search.json";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function makeView(): View & { searchHtml: string[]; faultsHtml: string[] } {
  const searchHtml: string[] = [];
  const faultsHtml: string[] = [];
  return {
    searchHtml,
    faultsHtml,
    setSearchHtml: (html) => searchHtml.push(html),
    setFaultsHtml: (html) => faultsHtml.push(html),
  };
}

describe("submitAnswer", () => {
  it("sends exactly one POST and then exactly one faults refresh", async () => {
    const calls: { url: string; method: string }[] = [];
    const fetchFn = vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = String(input);
      calls.push({ url, method: init?.method ?? "GET" });
      if (url.includes("/api/answers")) return jsonResponse({ ok: true });
      if (url.includes("/api/faults")) return jsonResponse(faultsFixture);
      throw new Error(`unexpected request ${url}`);
    });
    const view = makeView();
    const app = new Console(new ApiClient("", fetchFn as typeof fetch), view);

    await app.submitAnswer({
      student_id: "s1",
      question_id: "q9",
      knowledge_points: ["triangle"],
      correct: false,
    });

    expect(calls).toHaveLength(2);
    expect(calls[0]).toEqual({ url: "/api/answers", method: "POST" });
    expect(calls[1].method).toBe("GET");
    expect(calls[1].url).toBe("/api/faults?student=s1");
    expect(view.faultsHtml).toHaveLength(1);
    expect(view.faultsHtml[0]).toContain("Faults for s1");
  });

  it("does not refresh faults when the POST fails", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ error: "unknown knowledge points" }, 400));
    const view = makeView();
    const app = new Console(new ApiClient("", fetchFn as typeof fetch), view);

    await expect(
      app.submitAnswer({
        student_id: "s1",
        question_id: "q9",
        knowledge_points: ["nope"],
        correct: false,
      }),
    ).rejects.toThrow("unknown knowledge points");
    expect(fetchFn).toHaveBeenCalledTimes(1);
    expect(view.faultsHtml).toHaveLength(0);
  });
});

describe("runSearch", () => {
  it("renders the search response", async () => {
    const fetchFn = vi.fn(async () => jsonResponse(searchFixture));
    const view = makeView();
    const app = new Console(new ApiClient("", fetchFn as typeof fetch), view);
    await app.runSearch("the circumscribed circle radius of a triangle");
    expect(view.searchHtml).toHaveLength(1);
    expect(view.searchHtml[0]).toContain("Topic: triangle");
  });

  it("renders an error panel on a 400", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ error: "no topic entity" }, 400));
    const view = makeView();
    const app = new Console(new ApiClient("", fetchFn as typeof fetch), view);
    await app.runSearch("gibberish");
    expect(view.searchHtml[0]).toContain("no topic entity");
  });

  it("drops a stale response that resolves after a newer one", async () => {
    let resolveSlow!: (r: Response) => void;
    const slow = new Promise<Response>((res) => (resolveSlow = res));
    const fetchFn = vi.fn((input: RequestInfo | URL) => {
      const url = String(input);
      if (url.includes("q=slow")) return slow;
      return Promise.resolve(jsonResponse(searchFixture));
    });
    const view = makeView();
    const app = new Console(new ApiClient("", fetchFn as typeof fetch), view);

    const first = app.runSearch("slow");
    await app.runSearch("fast");
    resolveSlow(
      jsonResponse({ topic: "stale-topic", results: [] }),
    );
    await first;

    expect(view.searchHtml).toHaveLength(1);
    expect(view.searchHtml[0]).toContain("Topic: triangle");
    expect(view.searchHtml[0]).not.toContain("stale-topic");
  });
});
