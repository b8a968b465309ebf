/**
 * Typed HTTP client for the assessment service.
 * Every failure becomes an ApiError carrying the service's stable error code,
 * so callers branch on `code` instead of parsing messages.
 */

import type {
  CreateSessionRequest,
  CreateSessionResponse,
  HealthResponse,
  ItemsResponse,
  SessionSnapshot,
  SubmitResponseResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  health(): Promise<HealthResponse> {
    return this.request<HealthResponse>("GET", "/api/health");
  }

  listItems(): Promise<ItemsResponse> {
    return this.request<ItemsResponse>("GET", "/api/items");
  }

  createSession(req: CreateSessionRequest): Promise<CreateSessionResponse> {
    return this.request<CreateSessionResponse>("POST", "/api/sessions", req);
  }

  submitWords(
    sessionId: string,
    itemId: number,
    words: string[],
  ): Promise<SubmitResponseResponse> {
    return this.request<SubmitResponseResponse>(
      "POST",
      `/api/sessions/${encodeURIComponent(sessionId)}/responses`,
      { item_id: itemId, words },
    );
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return this.request<SessionSnapshot>(
      "GET",
      `/api/sessions/${encodeURIComponent(sessionId)}`,
    );
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchFn(this.base + path, {
        method,
        headers: body === undefined ? {} : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, "network_error", `service unreachable: ${String(err)}`);
    }
    if (!res.ok) {
      let code = "internal_error";
      let message = `HTTP ${res.status}`;
      try {
        const data = (await res.json()) as { code?: string; message?: string };
        if (typeof data.code === "string") code = data.code;
        if (typeof data.message === "string") message = data.message;
      } catch {
        // non-json error body: keep the fallback envelope
      }
      throw new ApiError(res.status, code, message);
    }
    return (await res.json()) as T;
  }
}
