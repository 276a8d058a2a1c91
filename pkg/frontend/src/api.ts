/** Thin client for the query service; the fetch function is injectable so
 * tests can run against a scripted mock server. */

import { Direction, GraphPayload, StatsPayload, isGraphPayload } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async requestPayload(url: string, init?: RequestInit): Promise<GraphPayload> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + url, init);
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`);
    }
    let body: unknown;
    try {
      body = await response.json();
    } catch (err) {
      throw new ApiError(`malformed server reply: ${String(err)}`);
    }
    if (!response.ok) {
      const message =
        typeof body === "object" && body !== null && "error" in body
          ? String((body as { error: unknown }).error)
          : `HTTP ${response.status}`;
      throw new ApiError(message);
    }
    if (!isGraphPayload(body)) {
      throw new ApiError("malformed server reply: not a graph payload");
    }
    return body;
  }

  search(key: string, value: string, vtype: string = "text"): Promise<GraphPayload> {
    const params = new URLSearchParams({ key, value, vtype });
    return this.requestPayload(`/api/nodes?${params}`);
  }

  node(id: string): Promise<GraphPayload> {
    return this.requestPayload(`/api/nodes/${encodeURIComponent(id)}`);
  }

  lineage(id: string, direction: Direction, depth: number): Promise<GraphPayload> {
    const params = new URLSearchParams({ depth: String(depth) });
    return this.requestPayload(
      `/api/nodes/${encodeURIComponent(id)}/${direction}?${params}`,
    );
  }

  async stats(): Promise<StatsPayload> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}/api/stats`);
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`);
    }
    if (!response.ok) throw new ApiError(`HTTP ${response.status}`);
    return (await response.json()) as StatsPayload;
  }
}
