import type {
  BatchPayload,
  ExplainPayload,
  LabelSubmission,
  StatusPayload,
  SummaryPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin client over the labeling service; all bodies JSON. */
export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, init);
    const text = await resp.text();
    let body: unknown = null;
    try {
      body = text ? JSON.parse(text) : null;
    } catch {
      body = null;
    }
    if (!resp.ok) {
      const err = (body ?? {}) as { error?: string; message?: string };
      throw new ApiError(resp.status, err.error ?? "error", err.message ?? resp.statusText);
    }
    return body as T;
  }

  createSession(body: Record<string, unknown>): Promise<{ session_id: string }> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getBatch(sessionId: string): Promise<BatchPayload> {
    return this.request(`/sessions/${sessionId}/batch`);
  }

  postLabels(sessionId: string, labels: LabelSubmission[]): Promise<SummaryPayload> {
    return this.request(`/sessions/${sessionId}/labels`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ labels }),
    });
  }

  getStatus(sessionId: string): Promise<StatusPayload> {
    return this.request(`/sessions/${sessionId}/status`);
  }

  getExplain(sessionId: string, row: number, col: number): Promise<ExplainPayload> {
    return this.request(`/sessions/${sessionId}/explain?row=${row}&col=${col}`);
  }

  deleteSession(sessionId: string): Promise<{ deleted: boolean }> {
    return this.request(`/sessions/${sessionId}`, { method: "DELETE" });
  }
}
