/** Thin fetch wrapper with per-view latest-wins resolution. */

export type ApiResult<T> =
  | { kind: "ok"; body: T }
  | { kind: "notready" }
  | { kind: "missing" }
  | { kind: "stale" }
  | { kind: "error"; detail: string };

export type FetchLike = (url: string) => Promise<Response>;

export class ApiClient {
  private tokens = new Map<string, number>();

  constructor(
    private base: string = "/api",
    private fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  /**
   * GET one endpoint. `view` names the slot the reply lands in; when two
   * fetches for the same slot overlap, only the newest may resolve "ok",
   * the older one reports itself stale and must be dropped unrendered.
   */
  async get<T>(view: string, path: string): Promise<ApiResult<T>> {
    const token = (this.tokens.get(view) ?? 0) + 1;
    this.tokens.set(view, token);
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path);
    } catch (err) {
      return { kind: "error", detail: String(err) };
    }
    if (this.tokens.get(view) !== token) return { kind: "stale" };
    if (response.status === 503) return { kind: "notready" };
    if (response.status === 404) return { kind: "missing" };
    if (!response.ok) return { kind: "error", detail: `HTTP ${response.status}` };
    const body = (await response.json()) as T;
    if (this.tokens.get(view) !== token) return { kind: "stale" };
    return { kind: "ok", body };
  }
}
