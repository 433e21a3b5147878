/** DOM wiring for the exploration client.
 *
 * One in-flight request at a time: the controls disable while a request is
 * out and re-enable on settle. All state lives in an immutable session
 * object persisted to localStorage, so reloads resume where the user left
 * off and a failed request leaves the session exactly as it was.
 */

import { ApiClient, ApiRequestError, type ApiErrorPayload, type DocumentPayload, type OperatorKind } from "./api.js";
import {
  applyOperator,
  canApplyOperator,
  currentList,
  deserializeSession,
  emptySession,
  rewindTo,
  runSearch,
  serializeSession,
  toggleSelection,
  type ExplorationSession,
} from "./session.js";
import {
  pageCount,
  renderBreadcrumb,
  renderDocumentCard,
  renderErrorBanner,
  renderListMeta,
  renderPager,
  renderRankedRows,
  type DocMeta,
} from "./render.js";

const SESSION_KEY = "bibsearch-session";
const API_KEY = "bibsearch-api-base";
const PAGE_SIZE = 25;

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  if (fromQuery !== null) {
    window.localStorage.setItem(API_KEY, fromQuery);
    return fromQuery;
  }
  return window.localStorage.getItem(API_KEY) ?? "";
}

const client = new ApiClient(apiBase());
const docMeta = new Map<string, DocMeta>();

let session: ExplorationSession = deserializeSession(
  window.localStorage.getItem(SESSION_KEY),
) ?? emptySession();
let busy = false;
let page = 0;
let lastError: ApiErrorPayload | null = null;
let retryAction: (() => void) | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function persist(): void {
  window.localStorage.setItem(SESSION_KEY, serializeSession(session));
}

async function hydrateDocMeta(ids: string[]): Promise<void> {
  const missing = ids.filter((id) => !docMeta.has(id));
  await Promise.all(
    missing.map(async (id) => {
      try {
        const doc: DocumentPayload = await client.document(id);
        docMeta.set(id, { title: doc.title, year: doc.year });
      } catch {
        docMeta.set(id, { title: "(not in corpus)", year: null });
      }
    }),
  );
}

function render(): void {
  el("breadcrumb").innerHTML = renderBreadcrumb(session);
  const list = currentList(session);
  const resultsNode = el("results");
  const metaNode = el("list-meta");
  const pagerNode = el("pager");
  if (list) {
    page = Math.min(page, pageCount(list.entries.length, PAGE_SIZE) - 1);
    metaNode.innerHTML = renderListMeta(list);
    resultsNode.innerHTML = renderRankedRows(list, session.selection, docMeta, {
      page,
      size: PAGE_SIZE,
    });
    pagerNode.innerHTML = renderPager(list.entries.length, { page, size: PAGE_SIZE });
  } else {
    metaNode.innerHTML = "";
    resultsNode.innerHTML = `<p class="empty-state">run a search to start a session</p>`;
    pagerNode.innerHTML = "";
  }
  const bannerNode = el("banner");
  bannerNode.innerHTML = lastError ? renderErrorBanner(lastError) : "";
  const selectionNode = el("selection-info");
  selectionNode.textContent = session.selection.length
    ? `${session.selection.length} selected`
    : "no selection (operators act on the whole list)";
  const applyDisabled = busy || !canApplyOperator(session);
  for (const button of document.querySelectorAll<HTMLButtonElement>("button.op")) {
    button.disabled = applyDisabled;
  }
  (el("search-submit") as HTMLButtonElement).disabled = busy;
  el("detail").innerHTML = "";
}

function showError(error: unknown, retry: () => void): void {
  if (error instanceof ApiRequestError) {
    lastError = error.payload;
  } else {
    lastError = { code: "error", message: String(error), detail: null };
  }
  retryAction = retry;
}

async function guarded(action: () => Promise<void>): Promise<void> {
  if (busy) return;
  busy = true;
  render();
  try {
    await action();
    lastError = null;
    retryAction = null;
  } catch (error) {
    showError(error, () => void guarded(action));
  } finally {
    busy = false;
    persist();
    render();
  }
}

function searchAction(): Promise<void> {
  const read = (id: string) => (el<HTMLInputElement>(id).value.trim() || undefined);
  const numeric = (id: string) => {
    const text = el<HTMLInputElement>(id).value.trim();
    return text ? Number(text) : undefined;
  };
  const query = {
    title: read("q-title"),
    abstract: read("q-abstract"),
    author: read("q-author"),
    year_min: numeric("q-year-min"),
    year_max: numeric("q-year-max"),
    limit: numeric("q-limit"),
  };
  return (async () => {
    const next = await runSearch(client, query);
    await hydrateDocMeta(next.steps[0]?.list.entries.map((entry) => entry.id) ?? []);
    session = next;
    page = 0;
  })();
}

function operatorAction(kind: OperatorKind): Promise<void> {
  return (async () => {
    const limitText = el<HTMLInputElement>("op-limit").value.trim();
    const limit = limitText ? Number(limitText) : 500;
    const next = await applyOperator(session, kind, limit, client);
    const last = next.steps[next.steps.length - 1];
    await hydrateDocMeta(last ? last.list.entries.map((entry) => entry.id) : []);
    session = next;
    page = 0;
  })();
}

function wire(): void {
  el("search-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void guarded(searchAction);
  });

  for (const button of document.querySelectorAll<HTMLButtonElement>("button.op")) {
    button.addEventListener("click", () => {
      const kind = button.dataset.kind as OperatorKind;
      void guarded(() => operatorAction(kind));
    });
  }

  el("breadcrumb").addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLButtonElement>("button.crumb");
    if (!target || busy) return;
    session = rewindTo(session, Number(target.dataset.step));
    page = 0;
    persist();
    render();
  });

  el("pager").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.classList.contains("page-prev")) {
      page = Math.max(0, page - 1);
      render();
    } else if (target.classList.contains("page-next")) {
      page = page + 1;
      render();
    }
  });

  el("results").addEventListener("change", (event) => {
    const target = event.target as HTMLInputElement;
    if (!target.classList.contains("select-row")) return;
    session = toggleSelection(session, target.dataset.id ?? "");
    persist();
    render();
  });

  el("results").addEventListener("click", (event) => {
    const cell = (event.target as HTMLElement).closest<HTMLElement>("td.doc-id");
    if (!cell) return;
    const row = cell.closest<HTMLElement>("tr");
    const id = row?.dataset.id;
    if (!id) return;
    void client
      .document(id)
      .then((doc) => {
        el("detail").innerHTML = renderDocumentCard(doc);
      })
      .catch(() => undefined);
  });

  el("banner").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.classList.contains("retry") && retryAction) {
      const action = retryAction;
      lastError = null;
      retryAction = null;
      render();
      action();
    } else if (target.classList.contains("dismiss")) {
      lastError = null;
      retryAction = null;
      render();
    }
  });

  el("clear-session").addEventListener("click", () => {
    if (busy) return;
    session = emptySession();
    page = 0;
    persist();
    render();
  });
}

async function init(): Promise<void> {
  wire();
  const list = currentList(session);
  if (list) {
    await hydrateDocMeta(list.entries.map((entry) => entry.id));
  }
  render();
  try {
    const health = await client.health();
    el("generation").textContent = `generation ${health.generation}`;
  } catch {
    el("generation").textContent = "service unreachable";
  }
}

void init();
