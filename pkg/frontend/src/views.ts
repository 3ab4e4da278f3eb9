/** String-rendered views.
 *
 * Every view returns an HTML string, so rendering is testable without a DOM.
 * Suggestion scores are printed exactly as the retrieve endpoint returned
 * them; the client never re-ranks or re-scores.
 */

import { AnnotationMode, Demo, Stats, TaxonomyNode } from "./api.js";
import { AnnotationSession } from "./session.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderSuggestionCards(demos: Demo[], k: number = 3): string {
  const cards = demos.slice(0, k).map(
    (demo, rank) => `
    <div class="suggestion-card" data-doc-id="${escapeHtml(demo.doc_id)}">
      <span class="rank">#${rank + 1}</span>
      <span class="score">${demo.score}</span>
      <span class="labels">${escapeHtml(demo.labels.join(" / "))}</span>
      <p class="demo-text">${escapeHtml(demo.text)}</p>
    </div>`,
  );
  return `<div class="suggestions">${cards.join("")}</div>`;
}

export function renderCandidates(candidates: TaxonomyNode[], withDescriptions: boolean): string {
  const items = candidates.map((node) => {
    const desc =
      withDescriptions && node.description
        ? `<span class="description">${escapeHtml(node.description)}</span>`
        : "";
    return `
    <li>
      <button class="candidate" data-name="${escapeHtml(node.name)}">${escapeHtml(node.name)}</button>
      ${desc}
    </li>`;
  });
  return `<ul class="candidates">${items.join("")}</ul>`;
}

/** The per-mode aid panel: nothing beyond the bare candidates in direct
 * mode, label descriptions in with-descriptions mode, descriptions plus the
 * suggestion cards in retrieval-assisted mode. */
export function renderAidPanel(mode: AnnotationMode, demos: Demo[]): string {
  switch (mode) {
    case "direct":
      return `<div class="aid aid-direct"></div>`;
    case "with-descriptions":
      return `<div class="aid aid-descriptions"><p>Label descriptions are shown next to each candidate.</p></div>`;
    case "retrieval-assisted":
      return `<div class="aid aid-retrieval"><p>Most similar labeled examples:</p>${renderSuggestionCards(demos)}</div>`;
  }
}

export function renderBreadcrumb(chosen: string[]): string {
  if (chosen.length === 0) return `<nav class="breadcrumb">(root)</nav>`;
  return `<nav class="breadcrumb">${chosen.map(escapeHtml).join(" &gt; ")}</nav>`;
}

export function renderModeToggle(active: AnnotationMode): string {
  const modes: AnnotationMode[] = ["direct", "with-descriptions", "retrieval-assisted"];
  const buttons = modes.map(
    (m) =>
      `<button class="mode${m === active ? " active" : ""}" data-mode="${m}">${m}</button>`,
  );
  return `<div class="mode-toggle">${buttons.join("")}</div>`;
}

export function renderTask(session: AnnotationSession): string {
  const task = session.currentTask;
  const demos = session.visibleDemos();
  const complete = session.isComplete();
  const body = complete
    ? `<button class="submit">Submit</button>`
    : renderCandidates(session.candidates(), session.mode !== "direct");
  const back =
    session.chosenNames.length > 0 ? `<button class="back">Back</button>` : "";
  return `
  <section class="task" data-task-id="${escapeHtml(task.id)}">
    ${renderModeToggle(session.mode)}
    <p class="doc-text">${escapeHtml(task.text)}</p>
    ${renderBreadcrumb(session.chosenNames)}
    <h2>Level ${complete ? "done" : session.level}</h2>
    ${body}
    ${back}
    ${renderAidPanel(session.mode, demos)}
  </section>`;
}

export function renderStats(stats: Stats): string {
  const rows = Object.entries(stats.per_mode).map(
    ([mode, agg]) =>
      `<tr><td>${escapeHtml(mode)}</td><td>${agg.count}</td><td>${agg.avg_seconds.toFixed(1)}s</td></tr>`,
  );
  return `
  <section class="stats">
    <p>${stats.count} annotations, ${stats.avg_seconds.toFixed(1)}s average.</p>
    <table><tr><th>mode</th><th>count</th><th>avg seconds</th></tr>${rows.join("")}</table>
    <p>${stats.agreement.docs_all_agree} of ${stats.agreement.docs_multi_annotated} multiply-annotated documents agree.</p>
  </section>`;
}

export function renderDone(): string {
  return `<section class="done"><p>No unannotated tasks remain. Thank you!</p></section>`;
}

export function renderError(message: string): string {
  return `<div class="error">${escapeHtml(message)} <button class="retry">Retry</button></div>`;
}
