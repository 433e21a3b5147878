import { describe, expect, it } from "vitest";

import { ApiClient, ApiRequestError } from "../src/api.js";

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("api client", () => {
  it("parses successful responses", async () => {
    const client = new ApiClient("", async () =>
      jsonResponse({ generation: 1, provenance: "search(title)", truncated: false, entries: [] }),
    );
    const result = await client.search({ title: "stars" });
    expect(result.provenance).toBe("search(title)");
    expect(result.entries).toEqual([]);
  });

  it("surfaces structured errors as ApiRequestError", async () => {
    const client = new ApiClient("", async () =>
      jsonResponse({ code: "invalid_query", message: "bad query", detail: null }, 400),
    );
    const error = await client.search({}).catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiRequestError);
    expect((error as ApiRequestError).payload.code).toBe("invalid_query");
    expect((error as ApiRequestError).status).toBe(400);
  });

  it("coerces malformed error bodies", async () => {
    const client = new ApiClient("", async () => new Response("boom", { status: 500 }));
    const error = await client.health().catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiRequestError);
    expect((error as ApiRequestError).payload.code).toBe("error");
  });

  it("propagates network failures", async () => {
    const client = new ApiClient("", async () => {
      throw new TypeError("fetch failed");
    });
    await expect(client.health()).rejects.toThrow("fetch failed");
  });

  it("prefixes the configured base and encodes document ids", async () => {
    const urls: string[] = [];
    const client = new ApiClient("http://api.example", async (url) => {
      urls.push(url);
      return jsonResponse({});
    });
    await client.document("a/b c");
    await client.operator("references", ["x"], 10);
    expect(urls).toEqual([
      "http://api.example/docs/a%2Fb%20c",
      "http://api.example/op/references",
    ]);
  });
});
