/**
 * HTTP client for the loopback explain service.
 *
 * The service only ever returns `ok` / `no_indicators` envelopes with a
 * 2xx status; every non-2xx becomes a thrown error here so callers have a
 * single failure path. `fetchFn` is injectable for tests.
 */

import type { ExplainEnvelope, ExplainRequest, HealthBody } from "./types.js";

export const DEFAULT_ENDPOINT = "http://127.0.0.1:8377";
export const DEFAULT_TIMEOUT_MS = 30_000;
export const HEALTH_TIMEOUT_MS = 1_500;

/** The request did not complete within the deadline. */
export class ServiceTimeout extends Error {}

/** The service is not reachable at all (connection refused, DNS, …). */
export class ServiceDown extends Error {}

/** The service answered with a non-2xx status. */
export class ServiceRejected extends Error {
  constructor(
    public readonly httpStatus: number,
    detail: string,
  ) {
    super(`HTTP ${httpStatus}: ${detail}`);
  }
}

export interface ServiceClientOptions {
  baseUrl?: string;
  token?: string;
  timeoutMs?: number;
  fetchFn?: typeof fetch;
}

export class ServiceClient {
  private readonly baseUrl: string;
  private readonly token: string;
  private readonly timeoutMs: number;
  private readonly fetchFn: typeof fetch;

  constructor(options: ServiceClientOptions = {}) {
    this.baseUrl = (options.baseUrl ?? DEFAULT_ENDPOINT).replace(/\/$/, "");
    this.token = options.token ?? "";
    this.timeoutMs = options.timeoutMs ?? DEFAULT_TIMEOUT_MS;
    this.fetchFn = options.fetchFn ?? fetch;
  }

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) {
      headers["X-PXP-Token"] = this.token;
    }
    return headers;
  }

  private async request(path: string, init: RequestInit, timeoutMs: number): Promise<Response> {
    const abort = new AbortController();
    const timer = setTimeout(() => abort.abort(), timeoutMs);
    try {
      return await this.fetchFn(`${this.baseUrl}${path}`, { ...init, signal: abort.signal });
    } catch (error) {
      if (abort.signal.aborted) {
        throw new ServiceTimeout(`${path} did not answer within ${timeoutMs} ms`);
      }
      throw new ServiceDown(`${path} unreachable: ${String(error)}`);
    } finally {
      clearTimeout(timer);
    }
  }

  /**
   * Analyze one page. Resolves with an `ok` or `no_indicators` envelope;
   * throws ServiceTimeout / ServiceDown / ServiceRejected otherwise.
   */
  async explain(request: ExplainRequest): Promise<ExplainEnvelope> {
    const response = await this.request(
      "/v1/explain",
      { method: "POST", headers: this.headers(), body: JSON.stringify(request) },
      this.timeoutMs,
    );
    let body: ExplainEnvelope;
    try {
      body = (await response.json()) as ExplainEnvelope;
    } catch {
      throw new ServiceRejected(response.status, "response body is not JSON");
    }
    if (!response.ok) {
      throw new ServiceRejected(response.status, body.error_detail ?? "unknown error");
    }
    return body;
  }

  /**
   * Liveness probe. Resolves for both healthy (200) and degraded (503)
   * services — a degraded service is still there; only a connection
   * failure throws ServiceDown.
   */
  async health(): Promise<HealthBody> {
    const response = await this.request("/v1/health", { headers: this.headers() }, HEALTH_TIMEOUT_MS);
    try {
      return (await response.json()) as HealthBody;
    } catch {
      throw new ServiceDown("health endpoint returned a non-JSON body");
    }
  }
}
