/** Pure HTML renderers.
 *
 * These take API payloads and produce markup; numbers pass straight through
 * from the payloads (tests compare rendered scores to recorded responses).
 */

import type { ApiErrorPayload, DocumentPayload, RankedListPayload } from "./api.js";
import type { ExplorationSession, SessionStep } from "./session.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function formatScore(score: number): string {
  return Number.isInteger(score) ? String(score) : score.toFixed(4);
}

export interface DocMeta {
  title: string;
  year: number | null;
}

export interface PageSpec {
  page: number;
  size: number;
}

export function pageCount(total: number, size: number): number {
  return Math.max(1, Math.ceil(total / size));
}

export function renderRankedRows(
  list: RankedListPayload | Omit<RankedListPayload, "generation">,
  selection: ReadonlyArray<string>,
  meta: ReadonlyMap<string, DocMeta> = new Map(),
  pageSpec?: PageSpec,
): string {
  if (list.entries.length === 0) {
    return `<p class="empty-state">no matches</p>`;
  }
  const offset = pageSpec ? pageSpec.page * pageSpec.size : 0;
  const visible = pageSpec
    ? list.entries.slice(offset, offset + pageSpec.size)
    : list.entries;
  const rows = visible
    .map((entry, index) => {
      const info = meta.get(entry.id);
      const checked = selection.includes(entry.id) ? " checked" : "";
      const external = entry.external ? ` <span class="tag">external</span>` : "";
      const year = info?.year ? String(info.year) : "";
      const title = info ? escapeHtml(info.title) : "";
      return (
        `<tr data-id="${escapeHtml(entry.id)}">` +
        `<td>${offset + index + 1}</td>` +
        `<td><input type="checkbox" class="select-row" data-id="${escapeHtml(entry.id)}"${checked}></td>` +
        `<td class="score">${formatScore(entry.score)}</td>` +
        `<td class="doc-id">${escapeHtml(entry.id)}${external}</td>` +
        `<td>${year}</td>` +
        `<td class="title">${title}</td>` +
        `</tr>`
      );
    })
    .join("");
  return (
    `<table class="results"><thead><tr>` +
    `<th>#</th><th></th><th>score</th><th>id</th><th>year</th><th>title</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderListMeta(list: RankedListPayload | Omit<RankedListPayload, "generation">): string {
  const truncated = list.truncated ? " (truncated)" : "";
  return `<p class="list-meta">${escapeHtml(list.provenance)}: ${list.entries.length} results${truncated}</p>`;
}

export function renderPager(total: number, pageSpec: PageSpec): string {
  const pages = pageCount(total, pageSpec.size);
  if (pages <= 1) {
    return "";
  }
  const prevDisabled = pageSpec.page <= 0 ? " disabled" : "";
  const nextDisabled = pageSpec.page >= pages - 1 ? " disabled" : "";
  return (
    `<nav class="pager">` +
    `<button class="page-prev"${prevDisabled}>&larr; prev</button>` +
    `<span>page ${pageSpec.page + 1} of ${pages}</span>` +
    `<button class="page-next"${nextDisabled}>next &rarr;</button>` +
    `</nav>`
  );
}

export function stepLabel(step: SessionStep, index: number): string {
  return `${index + 1}. ${step.kind} (${step.list.entries.length})`;
}

export function renderBreadcrumb(session: ExplorationSession): string {
  if (session.steps.length === 0) {
    return `<span class="crumb-empty">no steps yet</span>`;
  }
  return session.steps
    .map((step, index) => {
      const current = index === session.steps.length - 1 ? " current" : "";
      return (
        `<button class="crumb${current}" data-step="${index}">` +
        `${escapeHtml(stepLabel(step, index))}</button>`
      );
    })
    .join(`<span class="crumb-sep">&rarr;</span>`);
}

export function renderErrorBanner(error: ApiErrorPayload): string {
  const detail = error.detail ? `<span class="detail">${escapeHtml(error.detail)}</span>` : "";
  return (
    `<div class="banner error" role="alert">` +
    `<strong>${escapeHtml(error.code)}</strong> ${escapeHtml(error.message)}${detail}` +
    `<button class="retry">retry</button><button class="dismiss">dismiss</button>` +
    `</div>`
  );
}

export function renderDocumentCard(doc: DocumentPayload): string {
  const authors = doc.authors.map(escapeHtml).join("; ");
  return (
    `<article class="doc-card">` +
    `<h3>${escapeHtml(doc.title)}</h3>` +
    `<p class="byline">${authors} &middot; ${doc.year} &middot; ${escapeHtml(doc.journal)}</p>` +
    `<p>${escapeHtml(doc.abstract)}</p>` +
    `</article>`
  );
}

/** Extract (id, rendered score) pairs back out of rendered rows; the tests
 * use this to prove displayed numbers equal the recorded payload values. */
export function extractRenderedEntries(html: string): Array<{ id: string; score: string }> {
  const out: Array<{ id: string; score: string }> = [];
  const pattern = /<td class="score">([^<]*)<\/td><td class="doc-id">([^<]*)</g;
  for (const match of html.matchAll(pattern)) {
    out.push({ id: match[2] ?? "", score: match[1] ?? "" });
  }
  return out;
}
