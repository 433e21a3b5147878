/** Typed client for the bibsearch HTTP API.
 *
 * The UI computes nothing itself: every score, ordering, and flag shown on
 * screen comes out of these response payloads untouched.
 */

export type OperatorKind = "similar" | "references" | "citations" | "alsoread";

export interface RankedEntry {
  id: string;
  score: number;
  external: boolean;
}

export interface RankedListPayload {
  generation: number;
  provenance: string;
  truncated: boolean;
  entries: RankedEntry[];
}

export interface ChainStagePayload {
  kind: OperatorKind;
  limit: number;
  empty: boolean;
  result: Omit<RankedListPayload, "generation">;
}

export interface ChainPayload {
  generation: number;
  seed: Omit<RankedListPayload, "generation">;
  stages: ChainStagePayload[];
}

export interface DocumentPayload {
  generation: number;
  id: string;
  title: string;
  abstract: string;
  authors: string[];
  year: number;
  journal: string;
}

export interface ApiErrorPayload {
  code: "not_found" | "invalid_query" | "parse_error" | "conflict" | "error";
  message: string;
  detail: string | null;
}

export interface SearchRequest {
  title?: string;
  abstract?: string;
  author?: string;
  year_min?: number;
  year_max?: number;
  limit?: number;
}

export class ApiRequestError extends Error {
  constructor(
    readonly payload: ApiErrorPayload,
    readonly status: number,
  ) {
    super(payload.message);
    this.name = "ApiRequestError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

function coerceError(data: unknown, status: number): ApiErrorPayload {
  if (
    typeof data === "object" &&
    data !== null &&
    "code" in data &&
    "message" in data
  ) {
    return data as ApiErrorPayload;
  }
  return { code: "error", message: `request failed with status ${status}`, detail: null };
}

async function request<T>(
  fetchImpl: FetchLike,
  url: string,
  init?: RequestInit,
): Promise<T> {
  const response = await fetchImpl(url, init);
  let data: unknown = null;
  try {
    data = await response.json();
  } catch {
    data = null;
  }
  if (!response.ok) {
    throw new ApiRequestError(coerceError(data, response.status), response.status);
  }
  return data as T;
}

function post<T>(fetchImpl: FetchLike, base: string, path: string, body: unknown): Promise<T> {
  return request<T>(fetchImpl, `${base}${path}`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
}

export class ApiClient {
  constructor(
    readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  health(): Promise<{ status: string; generation: number }> {
    return request(this.fetchImpl, `${this.base}/health`);
  }

  search(query: SearchRequest): Promise<RankedListPayload> {
    return post(this.fetchImpl, this.base, "/search", query);
  }

  similar(seedIds: string[], limit?: number): Promise<RankedListPayload> {
    return post(this.fetchImpl, this.base, "/similar", { seed_ids: seedIds, limit });
  }

  operator(kind: Exclude<OperatorKind, "similar">, ids: string[], limit?: number): Promise<RankedListPayload> {
    return post(this.fetchImpl, this.base, `/op/${kind}`, { ids, limit });
  }

  chain(body: unknown): Promise<ChainPayload> {
    return post(this.fetchImpl, this.base, "/chain", body);
  }

  document(id: string): Promise<DocumentPayload> {
    return request(this.fetchImpl, `${this.base}/docs/${encodeURIComponent(id)}`);
  }
}
