import { ApiClient, ApiError } from "./api.js";
import { BatchViewModel } from "./batchModel.js";
import type { SortKey } from "./dashboardModel.js";
import type { ExplainPayload, StatusPayload } from "./types.js";

export interface AppState {
  sessionId: string | null;
  batch: BatchViewModel | null;
  status: StatusPayload | null;
  banner: string | null;
  terminal: boolean;
  explanation: ExplainPayload | null;
  explanationPlaceholder: string | null;
  sortKey: SortKey;
  sortAscending: boolean;
}

type Listener = (state: AppState) => void;

/**
 * Session flow: fetch batch, buffer keyboard decisions, submit, repeat.
 * All state derives from server responses; a failed submit never mutates
 * local progress beyond surfacing a banner with a refetched batch.
 */
export class AppController {
  readonly state: AppState = {
    sessionId: null,
    batch: null,
    status: null,
    banner: null,
    terminal: false,
    explanation: null,
    explanationPlaceholder: null,
    sortKey: "meanCertainty",
    sortAscending: true,
  };

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: Listener = () => {},
  ) {}

  private emit(): void {
    this.onChange(this.state);
  }

  async createSession(body: Record<string, unknown>): Promise<void> {
    const created = await this.api.createSession(body);
    await this.attachSession(created.session_id);
  }

  async attachSession(sessionId: string): Promise<void> {
    this.state.sessionId = sessionId;
    this.state.banner = null;
    this.state.terminal = false;
    await this.refreshBatch();
    await this.refreshStatus();
  }

  async refreshBatch(): Promise<void> {
    if (!this.state.sessionId) return;
    const payload = await this.api.getBatch(this.state.sessionId);
    if (payload.done || payload.cells.length === 0) {
      this.state.batch = null;
      this.state.terminal = true;
    } else {
      this.state.batch = new BatchViewModel(payload);
      this.state.terminal = false;
    }
    this.emit();
  }

  async refreshStatus(): Promise<void> {
    if (!this.state.sessionId) return;
    this.state.status = await this.api.getStatus(this.state.sessionId);
    this.emit();
  }

  /** Keyboard entry point; returns what happened so views can react. */
  async handleKey(key: string): Promise<string | null> {
    const batch = this.state.batch;
    if (!batch) return null;
    const outcome = batch.handleKey(key);
    if (outcome === "submit") {
      await this.submit();
      return "submitted";
    }
    if (outcome !== null) this.emit();
    return outcome;
  }

  async submit(): Promise<void> {
    const batch = this.state.batch;
    if (!batch || !batch.submittable || !this.state.sessionId) return;
    try {
      await this.api.postLabels(this.state.sessionId, batch.toLabels());
      this.state.banner = null;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // Stale or mismatched batch: surface the conflict and resync.
        this.state.banner = `Label submission rejected (${err.code}): ${err.message}`;
        await this.refreshBatch();
        await this.refreshStatus();
        return;
      }
      throw err;
    }
    await this.refreshBatch();
    await this.refreshStatus();
  }

  dismissBanner(): void {
    this.state.banner = null;
    this.emit();
  }

  /** Decision-path explanation for one cell; a 409 means no surrogate yet. */
  async explain(row: number, col: number): Promise<void> {
    if (!this.state.sessionId) return;
    try {
      this.state.explanation = await this.api.getExplain(this.state.sessionId, row, col);
      this.state.explanationPlaceholder = null;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.state.explanation = null;
        this.state.explanationPlaceholder = "no surrogate trained yet for this column";
      } else {
        throw err;
      }
    }
    this.emit();
  }

  setSort(key: SortKey): void {
    if (this.state.sortKey === key) {
      this.state.sortAscending = !this.state.sortAscending;
    } else {
      this.state.sortKey = key;
      this.state.sortAscending = true;
    }
    this.emit();
  }
}
