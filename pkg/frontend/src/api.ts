/** Thin typed client over the session-server HTTP API.
 *
 * The fetch implementation is injectable so unit tests can intercept every
 * request; all clustering data (labels, sides, heights) flows through here
 * untouched -- the UI never computes any of it.
 */

import type {
  ApiError,
  DendrogramDoc,
  SessionSummary,
  TreeDoc,
  ViewRecord,
} from "./types.js";

export class RequestFailed extends Error implements ApiError {
  status: number;
  code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.status = status;
    this.code = code;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class SessionApi {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new RequestFailed(
        response.status,
        (body as { code?: string }).code ?? "error",
        (body as { message?: string }).message ?? response.statusText,
      );
    }
    return body as T;
  }

  createSession(datasetId: string, config: Record<string, unknown>) {
    return this.request<SessionSummary>("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ dataset_id: datasetId, config }),
    });
  }

  getTree(sessionId: string) {
    return this.request<TreeDoc>(`/sessions/${sessionId}/tree`);
  }

  getView(sessionId: string, nodeId: number) {
    return this.request<ViewRecord>(`/sessions/${sessionId}/nodes/${nodeId}/view`);
  }

  setSplit(
    sessionId: string,
    nodeId: number,
    point: number,
    expectedRevision: number,
  ) {
    return this.request<TreeDoc>(`/sessions/${sessionId}/nodes/${nodeId}/split`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ point, expected_revision: expectedRevision }),
    });
  }

  reset(sessionId: string) {
    return this.request<TreeDoc>(`/sessions/${sessionId}/reset`, {
      method: "POST",
    });
  }

  getDendrogram(sessionId: string) {
    return this.request<DendrogramDoc>(`/sessions/${sessionId}/dendrogram`);
  }

  uploadDataset(name: string, csv: string, labelColumn?: number) {
    const params = new URLSearchParams({ name });
    if (labelColumn !== undefined) params.set("label_column", String(labelColumn));
    return this.request<{ dataset_id: string; n: number; d: number }>(
      `/datasets?${params}`,
      { method: "POST", headers: { "content-type": "text/csv" }, body: csv },
    );
  }
}
