import type { CompareResponse, HealthResponse, ScoreResponse } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Error reported by the service's {error: {code, message}} envelope. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

/**
 * Thin client for the scoring service. The fetch function is injectable so
 * tests can run against a mock service; the base URL is configurable.
 */
export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchFn(`${this.base}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return this.parse<T>(resp);
  }

  private async parse<T>(resp: Response): Promise<T> {
    let payload: unknown = null;
    try {
      payload = await resp.json();
    } catch {
      payload = null;
    }
    if (!resp.ok) {
      const err = (payload as { error?: { code?: string; message?: string } } | null)?.error;
      throw new ServiceError(resp.status, err?.code ?? "http_error", err?.message ?? `HTTP ${resp.status}`);
    }
    return payload as T;
  }

  score(text: string, title?: string): Promise<ScoreResponse> {
    return this.post<ScoreResponse>("/v1/score", title ? { text, title } : { text });
  }

  compare(variants: Array<{ label: string; text: string }>): Promise<CompareResponse> {
    return this.post<CompareResponse>("/v1/compare", { variants });
  }

  async health(): Promise<HealthResponse> {
    const resp = await this.fetchFn(`${this.base}/v1/health`, { method: "GET" });
    return this.parse<HealthResponse>(resp);
  }
}
