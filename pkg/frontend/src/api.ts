import type { SessionPayload } from "./types.js";

/** Thrown for non-2xx responses, carrying the service's error envelope. */
export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

/** Thin typed client for the /api/v1 surface; one base-URL setting. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}/api/v1${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = "http_error";
      let message = `${response.status}`;
      try {
        const payload = await response.json();
        code = payload.code ?? code;
        message = payload.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiRequestError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string; version: string }> {
    return this.request("GET", "/healthz");
  }

  createSession(productType: string, productName?: string, idempotencyKey?: string): Promise<SessionPayload> {
    return this.request("POST", "/sessions", {
      product_type: productType,
      product_name: productName ?? null,
      idempotency_key: idempotencyKey ?? null,
    });
  }

  getSession(id: string): Promise<SessionPayload> {
    return this.request("GET", `/sessions/${encodeURIComponent(id)}`);
  }

  rateTopics(id: string, ratings: { topic: string; stars: number }[]): Promise<SessionPayload> {
    return this.request("POST", `/sessions/${encodeURIComponent(id)}/ratings`, ratings);
  }

  suggestPhrases(id: string): Promise<SessionPayload> {
    return this.request("POST", `/sessions/${encodeURIComponent(id)}/suggestions`);
  }

  updateDraft(id: string, text: string): Promise<SessionPayload> {
    return this.request("PUT", `/sessions/${encodeURIComponent(id)}/draft`, { text });
  }

  finalize(id: string): Promise<SessionPayload> {
    return this.request("POST", `/sessions/${encodeURIComponent(id)}/finalize`);
  }
}
