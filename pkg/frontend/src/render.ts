// Pure view construction: the same payload always yields a structurally
// identical DOM tree. All interaction goes through the handlers argument.

import type {
  ActionKind, NavTarget, SelectResult, SessionView, Table, TableRow,
} from "./types.js";

export interface Handlers {
  onAction(kind: ActionKind, targetId: string): void;
  onNavigate(target: NavTarget): void;
  onRetry(): void;
}

const COLOR_CLASS: Record<string, string> = {
  red: "c-red",
  green_1: "c-green-1",
  green_2: "c-green-2",
  green_3: "c-green-3",
  green_4: "c-green-4",
  neutral: "c-neutral",
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderErrorBanner(message: string, retry?: Handlers["onRetry"]): HTMLElement {
  const banner = el("div", "error-banner");
  banner.appendChild(el("span", "error-message", message));
  if (retry) {
    const button = el("button", "retry-button", "Retry");
    button.addEventListener("click", () => retry());
    banner.appendChild(button);
  }
  return banner;
}

function renderCode(view: SessionView): HTMLElement {
  const pane = el("section", "code-pane");
  pane.appendChild(el("h2", "pane-title", view.bug_id));
  const pre = el("pre", "code");
  view.source.split("\n").forEach((text, i) => {
    const line = i + 1;
    const row = el("div", line === view.buggy_line ? "code-line buggy-line" : "code-line");
    row.id = `L${line}`;
    row.appendChild(el("span", "line-number", String(line)));
    row.appendChild(el("span", "line-text", text));
    pre.appendChild(row);
  });
  pane.appendChild(pre);
  return pane;
}

function renderCards(view: SessionView, handlers: Handlers): HTMLElement {
  const section = el("section", "patch-cards");
  const heading = el("h2", "pane-title",
    `Representative patches (${view.active_count} active, ${view.excluded_ids.length} excluded)`);
  section.appendChild(heading);
  const crumbs = el("div", "breadcrumb", view.breadcrumb.join(" › "));
  section.appendChild(crumbs);
  for (const card of view.representatives) {
    const box = el("article", "patch-card");
    box.dataset.patchId = card.patch_id;
    box.dataset.clusterId = card.cluster_id;
    const title = el("header", "card-title",
      `${card.patch_id} · cluster of ${card.cluster_size} · distance ${card.distance_to_buggy} · APR rank ${card.original_rank}`);
    box.appendChild(title);
    box.appendChild(el("code", "card-replacement", card.replacement));
    const buttons = el("div", "card-actions");
    const explore = el("button", "action-explore", "Explore Similar Patches");
    explore.addEventListener("click", () => handlers.onAction("explore", card.cluster_id));
    const exclude = el("button", "action-exclude", "Exclude Similar Patches");
    exclude.addEventListener("click", () => handlers.onAction("exclude", card.cluster_id));
    const select = el("button", "action-select", "Select This Patch");
    select.addEventListener("click", () => handlers.onAction("select", card.patch_id));
    buttons.append(explore, exclude, select);
    box.appendChild(buttons);
    section.appendChild(box);
  }
  return section;
}

function renderRow(row: TableRow, handlers: Handlers): HTMLElement {
  const tr = el("tr", "value-row");
  const lineLabel = row.occurrence_count > 1
    ? `${row.line}#${row.occurrence}`
    : String(row.line);
  tr.appendChild(el("td", "cell-line", lineLabel));
  const name = el("td", "cell-name");
  const link = el("a", "nav-link", row.display_name);
  link.addEventListener("click", (event) => {
    event.preventDefault();
    handlers.onNavigate(row.nav_target);
  });
  name.appendChild(link);
  tr.appendChild(name);
  for (const [start, end] of row.merge_spans) {
    const value = row.values[start];
    const cell = el("td", `cell-value ${COLOR_CLASS[row.colors[start]] ?? "c-neutral"}`);
    cell.textContent = value === null ? "—" : value;
    if (end > start) cell.colSpan = end - start + 1;
    tr.appendChild(cell);
  }
  return tr;
}

function renderTable(table: Table, handlers: Handlers): HTMLElement {
  const details = el("details", "frame-table");
  details.open = true;
  details.appendChild(el("summary", "frame-name", table.frame));
  const tbl = el("table", "comparison-table");
  const head = el("tr", "header-row");
  head.appendChild(el("th", undefined, "Line#"));
  head.appendChild(el("th", undefined, "Runtime Value"));
  for (const column of table.columns) {
    head.appendChild(el("th", undefined, column));
  }
  tbl.appendChild(head);
  for (const row of table.rows) {
    tbl.appendChild(renderRow(row, handlers));
  }
  details.appendChild(tbl);
  return details;
}

function renderTables(view: SessionView, handlers: Handlers): HTMLElement {
  const section = el("section", "tables-pane");
  section.appendChild(el("h2", "pane-title", "Runtime comparison"));
  if (!view.tables.length) {
    section.appendChild(el("p", "empty-tables", "no runtime differences captured"));
    return section;
  }
  for (const table of view.tables) {
    section.appendChild(renderTable(table, handlers));
  }
  return section;
}

function renderSelection(result: SelectResult, view: SessionView): HTMLElement {
  const panel = el("section", "selection-panel");
  panel.appendChild(el("h2", "pane-title",
    result.matches_correct
      ? `Selected ${result.patch_id} — matches the known-correct patch`
      : `Selected ${result.patch_id}`));
  const diff = el("pre", "selection-diff");
  const before = view.source.split("\n")[view.buggy_line - 1] ?? "";
  const after = result.patched_source.split("\n")[view.buggy_line - 1] ?? "";
  const removed = el("div", "diff-removed", `- ${before.trim()}`);
  const added = el("div", "diff-added", `+ ${after.trim()}`);
  diff.append(removed, added);
  panel.appendChild(diff);
  return panel;
}

export interface RenderState {
  view: SessionView;
  error?: string | null;
  canRetry?: boolean;
  pending?: boolean;
  selectResult?: SelectResult | null;
}

export function renderSession(state: RenderState, handlers: Handlers): HTMLElement {
  const root = el("div", "session-view");
  if (state.error) {
    root.appendChild(renderErrorBanner(state.error, state.canRetry ? handlers.onRetry : undefined));
  }
  if (state.pending) root.classList.add("pending");
  root.appendChild(renderCode(state.view));
  root.appendChild(renderCards(state.view, handlers));
  if (state.selectResult) {
    root.appendChild(renderSelection(state.selectResult, state.view));
  }
  root.appendChild(renderTables(state.view, handlers));
  if (state.pending) {
    for (const button of root.querySelectorAll("button")) {
      (button as HTMLButtonElement).disabled = true;
    }
  }
  return root;
}
