import type { DashboardPayload, ValueGainReport, WhatIfRequest } from "./types.js";

/** Thin client over the read-only HTTP API; base URL is configurable. */

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
    public readonly detail: unknown = null
  ) {
    super(message);
  }
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string }
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly experimentId: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init)
  ) {}

  private url(suffix: string): string {
    const base = this.baseUrl.replace(/\/$/, "");
    return `${base}/api/v1/experiments/${encodeURIComponent(this.experimentId)}${suffix}`;
  }

  async dashboard(): Promise<DashboardPayload> {
    const response = await this.fetchFn(this.url("/dashboard"));
    if (response.status !== 200) {
      throw new ApiError(`dashboard request failed (${response.status})`, response.status);
    }
    return (await response.json()) as DashboardPayload;
  }

  async whatIf(request: WhatIfRequest): Promise<ValueGainReport> {
    const response = await this.fetchFn(this.url("/whatif"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    const body = (await response.json()) as Record<string, unknown>;
    if (response.status === 422) {
      throw new ApiError(formatDetail(body["detail"]), 422, body["detail"]);
    }
    if (response.status !== 200) {
      throw new ApiError(
        `what-if request failed (${response.status})`,
        response.status,
        body["detail"]
      );
    }
    return body as unknown as ValueGainReport;
  }
}

function formatDetail(detail: unknown): string {
  if (typeof detail === "string") {
    return detail;
  }
  if (Array.isArray(detail)) {
    return detail
      .map((item) =>
        typeof item === "object" && item !== null && "msg" in item
          ? String((item as { msg: unknown }).msg)
          : JSON.stringify(item)
      )
      .join("; ");
  }
  return JSON.stringify(detail);
}
