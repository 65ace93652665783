/** Thin typed client for the store gateway. */

import type {
  LogEntry,
  Report,
  RicStatus,
  ScenarioState,
  XAppDetail,
  XAppSummary,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class StoreApi {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async call<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new ApiError(
        resp.status,
        (body as { code?: string }).code ?? "INTERNAL",
        (body as { detail?: string }).detail ?? resp.statusText,
      );
    }
    return body as T;
  }

  listXapps(filters: { state?: string; q?: string; mtype?: number } = {}) {
    const params = new URLSearchParams();
    if (filters.state) params.set("state", filters.state);
    if (filters.q) params.set("q", filters.q);
    if (filters.mtype !== undefined) params.set("mtype", String(filters.mtype));
    const qs = params.toString();
    return this.call<XAppSummary[]>(`/xapps${qs ? "?" + qs : ""}`);
  }

  getXapp(id: string) {
    return this.call<XAppDetail>(`/xapps/${id}`);
  }

  getReport(id: string) {
    return this.call<Report>(`/xapps/${id}/report`);
  }

  submit(archive: BodyInit) {
    return this.call<XAppSummary>("/xapps", {
      method: "POST",
      body: archive,
      headers: { "content-type": "application/octet-stream" },
    });
  }

  deploy(id: string) {
    return this.call<XAppDetail>(`/xapps/${id}/deploy`, { method: "POST" });
  }

  undeploy(id: string) {
    return this.call<XAppDetail>(`/xapps/${id}/deploy`, { method: "DELETE" });
  }

  ricStatus() {
    return this.call<RicStatus>("/ric/status");
  }

  ricLogs(sinceSeq = -1, limit = 200) {
    return this.call<{ entries: LogEntry[]; next_seq: number }>(
      `/ric/logs?since_seq=${sinceSeq}&limit=${limit}`,
    );
  }

  scenarioState() {
    return this.call<ScenarioState>("/scenario/state");
  }

  startScenario(paceMs?: number) {
    const qs = paceMs === undefined ? "" : `?pace_ms=${paceMs}`;
    return this.call<unknown>(`/scenario/start${qs}`, { method: "POST" });
  }

  stopScenario() {
    return this.call<unknown>("/scenario/stop", { method: "POST" });
  }

  stepScenario(ticks = 1) {
    return this.call<ScenarioState>(`/scenario/step?ticks=${ticks}`, {
      method: "POST",
    });
  }
}
