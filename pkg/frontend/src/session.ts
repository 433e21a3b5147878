/** Exploration session state: an append-only chain of steps.
 *
 * Every transition returns a fresh session object; a failed request simply
 * never produces a new session, so "step not appended on error" holds by
 * construction. Rewinding truncates strictly from the tail.
 */

import type { ApiClient, OperatorKind, RankedListPayload, SearchRequest } from "./api.js";

export type StepKind = "search" | OperatorKind;

export interface SessionStep {
  kind: StepKind;
  /** request parameters that produced this step, for the breadcrumb */
  params: Record<string, unknown>;
  list: RankedListPayload;
}

export interface ExplorationSession {
  steps: SessionStep[];
  /** subset of the latest list's ids */
  selection: string[];
}

export function emptySession(): ExplorationSession {
  return { steps: [], selection: [] };
}

export function currentList(session: ExplorationSession): RankedListPayload | null {
  const last = session.steps[session.steps.length - 1];
  return last ? last.list : null;
}

export function startSession(step: SessionStep): ExplorationSession {
  return { steps: [step], selection: [] };
}

export function appendStep(session: ExplorationSession, step: SessionStep): ExplorationSession {
  return { steps: [...session.steps, step], selection: [] };
}

export function rewindTo(session: ExplorationSession, index: number): ExplorationSession {
  if (index < 0 || index >= session.steps.length) {
    return session;
  }
  return { steps: session.steps.slice(0, index + 1), selection: [] };
}

export function toggleSelection(session: ExplorationSession, id: string): ExplorationSession {
  const list = currentList(session);
  if (!list || !list.entries.some((entry) => entry.id === id)) {
    return session;
  }
  const selection = session.selection.includes(id)
    ? session.selection.filter((existing) => existing !== id)
    : [...session.selection, id];
  return { steps: session.steps, selection };
}

/** Operator target: the explicit selection if any, else the whole list. */
export function operatorTargets(session: ExplorationSession): string[] {
  const list = currentList(session);
  if (!list) {
    return [];
  }
  return session.selection.length > 0
    ? [...session.selection]
    : list.entries.map((entry) => entry.id);
}

export function canApplyOperator(session: ExplorationSession): boolean {
  return operatorTargets(session).length > 0;
}

/** Run a search and start a fresh session from its result. */
export async function runSearch(
  client: ApiClient,
  query: SearchRequest,
): Promise<ExplorationSession> {
  const list = await client.search(query);
  return startSession({ kind: "search", params: { ...query }, list });
}

/** Apply an operator to the selection (or full list) and append the result.
 *
 * Rejections propagate untouched; the caller keeps its old session, which is
 * exactly the "step not appended, retry available" behavior.
 */
export async function applyOperator(
  session: ExplorationSession,
  kind: OperatorKind,
  limit: number,
  client: ApiClient,
): Promise<ExplorationSession> {
  const targets = operatorTargets(session);
  if (targets.length === 0) {
    throw new Error("nothing to apply an operator to");
  }
  const list =
    kind === "similar"
      ? await client.similar(targets, limit)
      : await client.operator(kind, targets, limit);
  return appendStep(session, { kind, params: { ids: targets, limit }, list });
}

// ---------------------------------------------------------------------------
// Persistence: the session survives page reloads via local serialization.
// ---------------------------------------------------------------------------

const FORMAT = 1;

export function serializeSession(session: ExplorationSession): string {
  return JSON.stringify({ format: FORMAT, session });
}

function isRankedList(value: unknown): value is RankedListPayload {
  if (typeof value !== "object" || value === null) return false;
  const candidate = value as Record<string, unknown>;
  return (
    typeof candidate.provenance === "string" &&
    typeof candidate.truncated === "boolean" &&
    Array.isArray(candidate.entries) &&
    candidate.entries.every(
      (entry) =>
        typeof entry === "object" &&
        entry !== null &&
        typeof (entry as Record<string, unknown>).id === "string" &&
        typeof (entry as Record<string, unknown>).score === "number",
    )
  );
}

function isStep(value: unknown): value is SessionStep {
  if (typeof value !== "object" || value === null) return false;
  const candidate = value as Record<string, unknown>;
  return (
    typeof candidate.kind === "string" &&
    ["search", "similar", "references", "citations", "alsoread"].includes(candidate.kind) &&
    typeof candidate.params === "object" &&
    candidate.params !== null &&
    isRankedList(candidate.list)
  );
}

export function deserializeSession(raw: string | null): ExplorationSession | null {
  if (!raw) return null;
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof parsed !== "object" || parsed === null) return null;
  const wrapper = parsed as Record<string, unknown>;
  if (wrapper.format !== FORMAT) return null;
  const session = wrapper.session as Record<string, unknown> | undefined;
  if (!session || !Array.isArray(session.steps) || !Array.isArray(session.selection)) {
    return null;
  }
  if (!session.steps.every(isStep)) return null;
  if (!session.selection.every((id) => typeof id === "string")) return null;
  return { steps: session.steps as SessionStep[], selection: session.selection as string[] };
}
