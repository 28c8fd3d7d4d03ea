// Session controller: holds the current ViewModel, dispatches actions to the
// API, and re-renders. At most one mutation is in flight at a time.

import { ApiError, SessionApi } from "./api.js";
import { Handlers, RenderState, renderErrorBanner, renderSession } from "./render.js";
import type { ActionKind, NavTarget, SelectResult, SessionView } from "./types.js";
import { validateSessionView as validate } from "./types.js";

export class App {
  private state: RenderState | null = null;
  private pendingAction: { kind: ActionKind; targetId: string } | null = null;

  constructor(
    private api: SessionApi,
    private mount: HTMLElement,
  ) {}

  async start(bugId: string): Promise<void> {
    try {
      const view = await this.api.createSession(bugId);
      this.accept(view);
    } catch (err) {
      this.mount.replaceChildren(
        renderErrorBanner(`could not start a session: ${describe(err)}`),
      );
    }
  }

  /** Replace the ViewModel with a fresh payload (after validation). */
  accept(payload: SessionView): void {
    const problems = validate(payload);
    if (problems.length) {
      this.mount.replaceChildren(
        renderErrorBanner(`the server payload failed validation: ${problems.join("; ")}`),
      );
      return;
    }
    this.state = { view: payload, error: null, selectResult: this.state?.selectResult ?? null };
    this.render();
  }

  async dispatch(kind: ActionKind, targetId: string): Promise<void> {
    if (!this.state || this.state.pending) return;
    this.pendingAction = { kind, targetId };
    this.state = { ...this.state, pending: true, error: null };
    this.render();
    const sid = this.state.view.session_id;
    try {
      if (kind === "explore") {
        this.accept(await this.api.explore(sid, targetId));
      } else if (kind === "exclude") {
        this.accept(await this.api.exclude(sid, targetId));
      } else {
        const result: SelectResult = await this.api.select(sid, targetId);
        this.state = { ...this.state, pending: false, selectResult: result, error: null };
        this.render();
      }
      this.pendingAction = null;
    } catch (err) {
      const canRetry = err instanceof ApiError && err.code === "NetworkError";
      if (!canRetry) this.pendingAction = null;
      this.state = {
        ...this.state,
        pending: false,
        error: describe(err),
        canRetry,
      };
      this.render();
    }
  }

  retry(): void {
    const pending = this.pendingAction;
    this.pendingAction = null;
    if (pending) void this.dispatch(pending.kind, pending.targetId);
  }

  navigate(target: NavTarget): void {
    const line = document.getElementById(`L${target.line}`);
    if (line) {
      line.scrollIntoView({ block: "center" });
      line.classList.add("nav-flash");
      setTimeout(() => line.classList.remove("nav-flash"), 1200);
    }
  }

  private render(): void {
    if (!this.state) return;
    const handlers: Handlers = {
      onAction: (kind, id) => void this.dispatch(kind, id),
      onNavigate: (target) => this.navigate(target),
      onRetry: () => this.retry(),
    };
    this.mount.replaceChildren(renderSession(this.state, handlers));
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return String(err);
}
