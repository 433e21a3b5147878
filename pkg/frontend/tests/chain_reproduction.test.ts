/** The UI must reproduce the CLI's chain output step by step: rendered ids
 * and scores equal the recorded API responses, which themselves equal the
 * one-shot /chain result and the CLI's JSON output on the fixture corpus.
 * Fixtures come from frontend/scripts/record_fixtures.py.
 */

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { ApiClient, type ChainPayload, type RankedListPayload } from "../src/api.js";
import { extractRenderedEntries, formatScore, renderRankedRows } from "../src/render.js";
import { applyOperator, runSearch, type ExplorationSession } from "../src/session.js";

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8")) as T;
}

const seedResponse = fixture<RankedListPayload>("search_seed.json");
const stepResponses = {
  "/similar": fixture<RankedListPayload>("similar.json"),
  "/op/alsoread": fixture<RankedListPayload>("alsoread.json"),
  "/op/references": fixture<RankedListPayload>("references.json"),
  "/op/citations": fixture<RankedListPayload>("citations.json"),
};
const chain = fixture<ChainPayload>("chain.json");
const cliChain = fixture<ChainPayload>("cli_chain.json");

const SEED_TEXT =
  "distance measurements of supernovae point to an accelerating universe " +
  "with a cosmological constant";

function recordedFetch(): { client: ApiClient; seen: string[] } {
  const seen: string[] = [];
  const client = new ApiClient("", async (url, init) => {
    seen.push(url);
    const body = init?.body ? JSON.parse(String(init.body)) : {};
    let payload: unknown;
    if (url === "/search") {
      expect(body).toEqual({ abstract: SEED_TEXT, limit: 3 });
      payload = seedResponse;
    } else if (url in stepResponses) {
      payload = stepResponses[url as keyof typeof stepResponses];
    } else {
      return new Response(JSON.stringify({ code: "not_found", message: "no route", detail: url }), {
        status: 404,
        headers: { "content-type": "application/json" },
      });
    }
    return new Response(JSON.stringify(payload), {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  });
  return { client, seen };
}

function renderedPairs(list: RankedListPayload): Array<{ id: string; score: string }> {
  return extractRenderedEntries(renderRankedRows(list, []));
}

function payloadPairs(list: { entries: Array<{ id: string; score: number }> }) {
  return list.entries.map((entry) => ({ id: entry.id, score: formatScore(entry.score) }));
}

describe("chain reproduction against recorded responses", () => {
  it("CLI and one-shot chain recordings agree", () => {
    expect(cliChain).toEqual(chain);
  });

  it("drives the session step by step and renders exactly the recorded lists", async () => {
    const { client } = recordedFetch();
    let session: ExplorationSession = await runSearch(client, {
      abstract: SEED_TEXT,
      limit: 3,
    });
    expect(payloadPairs(session.steps[0]!.list)).toEqual(payloadPairs(seedResponse));

    const kinds = ["similar", "alsoread", "references", "citations"] as const;
    for (const kind of kinds) {
      session = await applyOperator(session, kind, 500, client);
    }
    expect(session.steps).toHaveLength(5);

    // every rendered stage equals the recorded response and the chain stage
    for (const [stageIndex, kind] of kinds.entries()) {
      const step = session.steps[stageIndex + 1]!;
      expect(step.kind).toBe(kind);
      const rendered = renderedPairs(step.list);
      const recorded =
        stepResponses[kind === "similar" ? "/similar" : (`/op/${kind}` as const)];
      expect(rendered).toEqual(payloadPairs(recorded));
      const chainStage = chain.stages[stageIndex]!;
      expect(chainStage.kind).toBe(kind);
      expect(rendered).toEqual(payloadPairs(chainStage.result));
      const cliStage = cliChain.stages[stageIndex]!;
      expect(rendered).toEqual(payloadPairs(cliStage.result));
    }
  });

  it("each step's request targets exactly the previous step's rendered ids", async () => {
    const bodies: Array<{ url: string; ids?: string[]; seed_ids?: string[] }> = [];
    const client = new ApiClient("", async (url, init) => {
      const body = init?.body ? JSON.parse(String(init.body)) : {};
      bodies.push({ url, ...body });
      const payload =
        url === "/search" ? seedResponse : stepResponses[url as keyof typeof stepResponses];
      return new Response(JSON.stringify(payload), { status: 200 });
    });
    let session = await runSearch(client, { abstract: SEED_TEXT, limit: 3 });
    for (const kind of ["similar", "alsoread", "references", "citations"] as const) {
      session = await applyOperator(session, kind, 500, client);
    }
    expect(bodies[1]?.seed_ids).toEqual(seedResponse.entries.map((e) => e.id));
    expect(bodies[2]?.ids).toEqual(stepResponses["/similar"].entries.map((e) => e.id));
    expect(bodies[3]?.ids).toEqual(stepResponses["/op/alsoread"].entries.map((e) => e.id));
    expect(bodies[4]?.ids).toEqual(stepResponses["/op/references"].entries.map((e) => e.id));
  });

  it("renders scores verbatim from payloads, never recomputing", () => {
    for (const payload of Object.values(stepResponses)) {
      const rendered = extractRenderedEntries(renderRankedRows(payload, []));
      payload.entries.forEach((entry, index) => {
        expect(rendered[index]?.score).toBe(formatScore(entry.score));
        expect(rendered[index]?.id).toBe(entry.id);
      });
    }
  });

  it("renders the empty state for empty lists", () => {
    const empty: RankedListPayload = {
      generation: 1,
      provenance: "references(0 inputs)",
      truncated: false,
      entries: [],
    };
    expect(renderRankedRows(empty, [])).toContain("no matches");
  });
});
